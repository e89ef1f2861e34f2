#include "engage/model.hpp"

#include <cctype>
#include <cmath>

#include "engage/cv.hpp"
#include "engage/error.hpp"

namespace engage {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Lda: return "LDA";
    case ClassifierKind::LinearSvm: return "LSVM";
    case ClassifierKind::RbfSvm: return "RSVM";
  }
  return "?";
}

ClassifierKind classifier_from_string(const std::string& name) {
  std::string upper = name;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "LDA") return ClassifierKind::Lda;
  if (upper == "LSVM") return ClassifierKind::LinearSvm;
  if (upper == "RSVM") return ClassifierKind::RbfSvm;
  raise(Err::InvalidSpec,
        "unknown classifier '" + name + "', expected one of: lda, lsvm, rsvm");
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    raise(Err::InvalidSpec, "grid axis needs 0 < min < max and at least 2 points");
  const double l0 = std::log10(lo);
  const double step = (std::log10(hi) - l0) / (points - 1);
  std::vector<double> values(points);
  for (int i = 0; i < points; ++i) values[i] = std::pow(10.0, l0 + step * i);
  return values;
}

GridSpec GridSpec::defaults() {
  GridSpec spec;
  spec.c_values = log_spaced(1e-3, 1e3, 7);
  spec.gamma_values = spec.c_values;
  return spec;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<long>(idx.size()), x.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<long>(i)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXi take_labels(const Eigen::VectorXi& y, const std::vector<int>& idx) {
  Eigen::VectorXi out(static_cast<long>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<long>(i)] = y[idx[i]];
  return out;
}

}  // namespace

GridChoice grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, ClassifierKind kind,
                       const GridSpec& grid, double svm_tol, long svm_max_iter,
                       std::uint64_t seed) {
  if (kind == ClassifierKind::Lda)
    raise(Err::InvalidSpec, "grid search applies to SVM classifiers only");
  if (grid.c_values.empty()) raise(Err::InvalidSpec, "empty C grid");
  if (kind == ClassifierKind::RbfSvm && grid.gamma_values.empty())
    raise(Err::InvalidSpec, "empty gamma grid");

  long n0 = 0, n1 = 0;
  for (long i = 0; i < y.size(); ++i) (y[i] == 1 ? n1 : n0) += 1;
  if (std::min(n0, n1) < grid.inner_folds)
    raise(Err::TooFewSamples, "each class needs at least " + std::to_string(grid.inner_folds) +
                                  " members, got " + std::to_string(std::min(n0, n1)));

  // One shared fold split keeps the comparison across grid points paired.
  const auto folds = stratified_kfold(y, grid.inner_folds, seed);
  struct Split {
    Eigen::MatrixXd x_train, x_test;
    Eigen::VectorXi y_train, y_test;
  };
  std::vector<Split> splits;
  for (const auto& test_idx : folds) {
    std::vector<char> is_test(y.size(), 0);
    for (int t : test_idx) is_test[t] = 1;
    std::vector<int> train_idx;
    for (long i = 0; i < y.size(); ++i)
      if (!is_test[i]) train_idx.push_back(static_cast<int>(i));
    splits.push_back({take_rows(x, train_idx), take_rows(x, test_idx),
                      take_labels(y, train_idx), take_labels(y, test_idx)});
  }

  const std::vector<double> gamma_axis =
      kind == ClassifierKind::RbfSvm ? grid.gamma_values : std::vector<double>{0.0};

  GridChoice choice;
  bool first = true;
  for (double c : grid.c_values) {
    for (double gamma : gamma_axis) {
      SvmConfig cfg;
      cfg.kernel = kind == ClassifierKind::RbfSvm ? KernelKind::Rbf : KernelKind::Linear;
      cfg.c = c;
      cfg.gamma = gamma;
      cfg.tol = svm_tol;
      cfg.max_iter = svm_max_iter;
      double total = 0.0;
      for (const auto& split : splits) {
        const SvmModel m = svm_fit(split.x_train, split.y_train, cfg);
        const Eigen::VectorXd scores = svm_scores(m, split.x_test);
        Eigen::VectorXi pred(scores.size());
        for (long i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= 0.0 ? 1 : 0;
        total += f1_score(split.y_test, pred);
      }
      const GridPoint point{c, gamma, total / static_cast<double>(splits.size())};
      choice.evaluated.push_back(point);
      // Strict improvement only: ascending visit order makes ties keep the
      // smaller C, then the smaller gamma.
      if (first || point.mean_f1 > choice.best.mean_f1) {
        choice.best = point;
        first = false;
      }
    }
  }
  return choice;
}

TrainedModel fit_classifier(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const ModelConfig& config, std::uint64_t seed) {
  TrainedModel model;
  model.kind = config.kind;
  if (config.kind == ClassifierKind::Lda) {
    model.lda = lda_fit(x, y, config.lda);
    return model;
  }
  const GridChoice choice =
      grid_search(x, y, config.kind, config.grid, config.svm_tol, config.svm_max_iter, seed);
  SvmConfig cfg;
  cfg.kernel = config.kind == ClassifierKind::RbfSvm ? KernelKind::Rbf : KernelKind::Linear;
  cfg.c = choice.best.c;
  cfg.gamma = choice.best.gamma;
  cfg.tol = config.svm_tol;
  cfg.max_iter = config.svm_max_iter;
  model.svm = svm_fit(x, y, cfg);
  model.chosen_c = choice.best.c;
  model.chosen_gamma = choice.best.gamma;
  return model;
}

Eigen::VectorXd decision_scores(const TrainedModel& model, const Eigen::MatrixXd& x) {
  return model.kind == ClassifierKind::Lda ? lda_scores(model.lda, x) : svm_scores(model.svm, x);
}

Eigen::VectorXi predict(const TrainedModel& model, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd scores = decision_scores(model, x);
  Eigen::VectorXi labels(scores.size());
  for (long i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= 0.0 ? 1 : 0;
  return labels;
}

}  // namespace engage
