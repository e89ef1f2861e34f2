#include "engage/cv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/pca.hpp"
#include "engage/rng.hpp"

namespace engage {

namespace {

//! Round-robin deal of each class's shuffled indices; the fold cursor is
//! shared across classes so total fold sizes stay within one of each other.
std::vector<std::vector<int>> deal_stratified(const std::vector<std::vector<int>>& by_class,
                                              int k, std::uint64_t seed) {
  std::mt19937_64 rng(mix64(seed));
  std::vector<std::vector<int>> folds(k);
  std::size_t cursor = 0;
  for (auto members : by_class) {
    portable_shuffle(members, rng);
    for (int idx : members) folds[cursor++ % k].push_back(idx);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

void check_binary(const Eigen::VectorXi& y) {
  for (long i = 0; i < y.size(); ++i)
    if (y[i] != 0 && y[i] != 1)
      raise(Err::InvalidSpec, "labels must be 0 or 1, got " + std::to_string(y[i]) +
                                  " at index " + std::to_string(i));
}

//! Classes ordered positive-first; raises when one is absent.
std::vector<std::vector<int>> split_by_class(const Eigen::VectorXi& y) {
  std::vector<std::vector<int>> by_class(2);
  for (long i = 0; i < y.size(); ++i) by_class[y[i] == 1 ? 0 : 1].push_back(static_cast<int>(i));
  if (by_class[0].empty() || by_class[1].empty())
    raise(Err::TooFewSamples, "both classes need at least one member");
  return by_class;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<long>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<long>(i)) = x.row(rows[i]);
  return out;
}

Eigen::VectorXi take_labels(const Eigen::VectorXi& y, const std::vector<int>& rows) {
  Eigen::VectorXi out(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<long>(i)] = y[rows[i]];
  return out;
}

//! Classifier fit and scoring on already-PCA-space rows.  Shared between
//! run_single_fold and experiment_matrix so the two paths stay identical.
//! Columns are standardized to the training fold's mean and standard
//! deviation first, which puts raw microvolt-scale scores on the footing
//! the hyper-parameter grid assumes; a zero-variance column is zeroed.
FoldOutcome eval_transformed(const Eigen::MatrixXd& train_z, const Eigen::VectorXi& train_y,
                             const Eigen::MatrixXd& test_z, const Eigen::VectorXi& test_y,
                             int pca_k, const ModelConfig& model, std::uint64_t seed) {
  const Eigen::RowVectorXd mean = train_z.colwise().mean();
  const Eigen::RowVectorXd std_dev =
      ((train_z.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(train_z.rows()))
          .sqrt();
  Eigen::RowVectorXd scale(std_dev.size());
  for (long j = 0; j < std_dev.size(); ++j)
    scale[j] = std_dev[j] > 1e-12 ? 1.0 / std_dev[j] : 0.0;
  const Eigen::MatrixXd train_s =
      (train_z.rowwise() - mean).array().rowwise() * scale.array();
  const Eigen::MatrixXd test_s =
      (test_z.rowwise() - mean).array().rowwise() * scale.array();

  const TrainedModel fitted = fit_classifier(train_s, train_y, model, seed);
  FoldOutcome outcome;
  outcome.pca_k = pca_k;
  outcome.chosen_c = fitted.chosen_c;
  outcome.chosen_gamma = fitted.chosen_gamma;
  outcome.predictions = predict(fitted, test_s);
  outcome.f1 = f1_score(test_y, outcome.predictions);
  return outcome;
}

std::vector<std::string> group_keys_for(const Dataset& dataset, const CvPlan& plan) {
  std::vector<std::string> keys;
  keys.reserve(dataset.epochs.size());
  for (const auto& epoch : dataset.epochs) {
    if (plan.group_by_ad && plan.group_by_subject)
      keys.push_back(epoch.subject_id + "/" + epoch.ad_id);
    else if (plan.group_by_ad)
      keys.push_back(epoch.ad_id);
    else
      keys.push_back(epoch.subject_id);
  }
  return keys;
}

std::vector<std::vector<int>> folds_for(const Dataset& dataset, const Eigen::VectorXi& y,
                                        const CvPlan& plan, std::uint64_t seed) {
  if (plan.group_by_ad || plan.group_by_subject)
    return grouped_stratified_kfold(y, group_keys_for(dataset, plan), plan.folds, seed);
  return stratified_kfold(y, plan.folds, seed);
}

void check_class_counts(const Eigen::VectorXi& y, int folds) {
  long positives = 0;
  for (long i = 0; i < y.size(); ++i) positives += y[i];
  const long negatives = y.size() - positives;
  if (positives < folds || negatives < folds) {
    std::ostringstream os;
    os << "need at least " << folds << " samples per class, got " << positives
       << " positive / " << negatives << " negative";
    raise(Err::TooFewSamples, os.str());
  }
}

void finalize_cell(CellResult& cell) {
  const auto& f1 = cell.per_run_f1;
  double sum = 0.0;
  for (double v : f1) sum += v;
  cell.f1_mean = f1.empty() ? 0.0 : sum / static_cast<double>(f1.size());
  double ss = 0.0;
  for (double v : f1) ss += (v - cell.f1_mean) * (v - cell.f1_mean);
  cell.f1_std = f1.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(f1.size()));
}

std::string format_cell(double mean, double std_dev) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", mean, std_dev);
  return buf;
}

//! Pads to a display width; the ± glyph counts as one column even though
//! it is two bytes in UTF-8.
std::string pad_display(const std::string& text, std::size_t width) {
  std::size_t display = text.size();
  if (text.find("±") != std::string::npos) display -= 1;
  std::string out = text;
  while (display < width) {
    out.push_back(' ');
    ++display;
  }
  return out;
}

constexpr std::array<ClassifierKind, 3> kAllClassifiers = {
    ClassifierKind::Lda, ClassifierKind::LinearSvm, ClassifierKind::RbfSvm};
constexpr std::array<WindowMode, 3> kAllWindows = {WindowMode::F30, WindowMode::L30,
                                                   WindowMode::L10};

}  // namespace

std::vector<std::vector<int>> stratified_kfold(const Eigen::VectorXi& y, int k,
                                               std::uint64_t seed) {
  if (y.size() == 0) raise(Err::Empty, "no labels to fold");
  if (k < 2) raise(Err::InvalidSpec, "need at least 2 folds, got " + std::to_string(k));
  if (y.size() < k)
    raise(Err::TooFewSamples, std::to_string(y.size()) + " samples cannot fill " +
                                  std::to_string(k) + " folds");
  check_binary(y);
  return deal_stratified(split_by_class(y), k, seed);
}

std::vector<std::vector<int>> grouped_stratified_kfold(const Eigen::VectorXi& y,
                                                       const std::vector<std::string>& group_keys,
                                                       int k, std::uint64_t seed) {
  if (y.size() == 0) raise(Err::Empty, "no labels to fold");
  if (static_cast<long>(group_keys.size()) != y.size())
    raise(Err::LengthMismatch, "group keys and labels differ in length");
  if (k < 2) raise(Err::InvalidSpec, "need at least 2 folds, got " + std::to_string(k));
  check_binary(y);

  // Group membership in first-appearance order keeps the result independent
  // of the map's internal ordering.
  std::map<std::string, int> group_id;
  std::vector<std::vector<int>> members;
  std::vector<int> positives;
  for (long i = 0; i < y.size(); ++i) {
    auto [it, inserted] = group_id.try_emplace(group_keys[i], static_cast<int>(members.size()));
    if (inserted) {
      members.emplace_back();
      positives.push_back(0);
    }
    members[it->second].push_back(static_cast<int>(i));
    positives[it->second] += y[i];
  }
  const int n_groups = static_cast<int>(members.size());
  if (n_groups < k)
    raise(Err::TooFewSamples, std::to_string(n_groups) + " groups cannot fill " +
                                  std::to_string(k) + " folds");

  // Stratify over group labels: a group counts as positive when at least
  // half its members are.
  std::vector<std::vector<int>> groups_by_class(2);
  for (int g = 0; g < n_groups; ++g) {
    const bool positive = 2 * positives[g] >= static_cast<int>(members[g].size());
    groups_by_class[positive ? 0 : 1].push_back(g);
  }
  if (groups_by_class[0].empty() || groups_by_class[1].empty())
    raise(Err::TooFewSamples, "both classes need at least one group");

  const auto group_folds = deal_stratified(groups_by_class, k, seed);
  std::vector<std::vector<int>> folds(k);
  for (int f = 0; f < k; ++f) {
    for (int g : group_folds[f])
      folds[f].insert(folds[f].end(), members[g].begin(), members[g].end());
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

double f1_score(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred) {
  if (y_true.size() != y_pred.size())
    raise(Err::LengthMismatch, "y_true has " + std::to_string(y_true.size()) +
                                   " entries, y_pred has " + std::to_string(y_pred.size()));
  if (y_true.size() == 0) raise(Err::Empty, "no predictions to score");
  check_binary(y_true);
  check_binary(y_pred);

  long tp = 0, fp = 0, fn = 0;
  for (long i = 0; i < y_true.size(); ++i) {
    if (y_pred[i] == 1 && y_true[i] == 1) ++tp;
    if (y_pred[i] == 1 && y_true[i] == 0) ++fp;
    if (y_pred[i] == 0 && y_true[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

FoldOutcome run_single_fold(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const std::vector<int>& train, const std::vector<int>& test,
                            const PcaTarget& pca, const ModelConfig& model,
                            std::uint64_t seed) {
  const Eigen::MatrixXd train_x = take_rows(x, train);
  const PcaModel projection = pca_fit(train_x, pca, seed);
  return eval_transformed(pca_transform(projection, train_x), take_labels(y, train),
                          pca_transform(projection, take_rows(x, test)),
                          take_labels(y, test), projection.k, model, seed);
}

Eigen::VectorXi dataset_labels(const Dataset& dataset, const CvPlan& plan) {
  Eigen::VectorXi y(static_cast<long>(dataset.epochs.size()));
  for (std::size_t i = 0; i < dataset.epochs.size(); ++i) {
    const auto& epoch = dataset.epochs[i];
    if (!epoch.label.has_value())
      raise(Err::InvalidSpec, "epoch '" + epoch.id + "' has no label");
    if (*epoch.label != 0 && *epoch.label != 1)
      raise(Err::InvalidSpec, "epoch '" + epoch.id + "' has label " +
                                  std::to_string(*epoch.label) + ", expected 0 or 1");
    y[static_cast<long>(i)] = *epoch.label;
  }
  if (plan.permute_labels && y.size() > 1) {
    std::vector<int> shuffled(y.data(), y.data() + y.size());
    std::mt19937_64 rng(mix64(plan.base_seed ^ 0x6c6162656cULL));
    portable_shuffle(shuffled, rng);
    for (long i = 0; i < y.size(); ++i) y[i] = shuffled[static_cast<std::size_t>(i)];
  }
  return y;
}

CellResult run_repeated_cv(const Dataset& dataset, WindowMode window,
                           const FeatureConfig& features, const ModelConfig& model,
                           const CvPlan& plan, int jobs) {
  const Eigen::VectorXi y = dataset_labels(dataset, plan);
  check_class_counts(y, plan.folds);
  const Eigen::MatrixXd x = feature_matrix(dataset, window, features);

  // Fold splits depend only on labels and the repetition seed, so they can
  // be precomputed; the fold runs themselves are independent.
  std::vector<std::vector<std::vector<int>>> splits(plan.repetitions);
  for (int r = 0; r < plan.repetitions; ++r)
    splits[r] = folds_for(dataset, y, plan, plan.base_seed + static_cast<std::uint64_t>(r));

  CellResult cell;
  cell.classifier = model.kind;
  cell.window = window;
  cell.per_run_f1.assign(static_cast<std::size_t>(plan.repetitions) * plan.folds, 0.0);

  const std::size_t runs = cell.per_run_f1.size();
  parallel_for(runs, jobs, [&](std::size_t run) {
    const int r = static_cast<int>(run) / plan.folds;
    const int f = static_cast<int>(run) % plan.folds;
    std::vector<int> train;
    for (int g = 0; g < plan.folds; ++g)
      if (g != f) train.insert(train.end(), splits[r][g].begin(), splits[r][g].end());
    try {
      const FoldOutcome outcome =
          run_single_fold(x, y, train, splits[r][f], features.pca, model,
                          plan.base_seed + static_cast<std::uint64_t>(r));
      cell.per_run_f1[run] = outcome.f1;
    } catch (const Error& e) {
      std::ostringstream os;
      os << to_string(model.kind) << "/" << to_string(window) << " repetition " << r
         << ", fold " << f << ": " << e.what();
      raise(e.code(), os.str());
    }
  });

  finalize_cell(cell);
  return cell;
}

std::vector<CellResult> experiment_matrix(const Dataset& dataset, const FeatureConfig& features,
                                          const ModelConfig& base_model, const CvPlan& plan,
                                          int jobs) {
  const Eigen::VectorXi y = dataset_labels(dataset, plan);
  check_class_counts(y, plan.folds);

  std::vector<std::vector<std::vector<int>>> splits(plan.repetitions);
  for (int r = 0; r < plan.repetitions; ++r)
    splits[r] = folds_for(dataset, y, plan, plan.base_seed + static_cast<std::uint64_t>(r));

  std::vector<CellResult> cells(kAllClassifiers.size() * kAllWindows.size());
  const std::size_t runs_per_cell = static_cast<std::size_t>(plan.repetitions) * plan.folds;
  for (std::size_t c = 0; c < kAllClassifiers.size(); ++c) {
    for (std::size_t w = 0; w < kAllWindows.size(); ++w) {
      CellResult& cell = cells[c * kAllWindows.size() + w];
      cell.classifier = kAllClassifiers[c];
      cell.window = kAllWindows[w];
      cell.per_run_f1.assign(runs_per_cell, 0.0);
    }
  }

  // One PCA fit per (window, repetition, fold) serves all three classifiers;
  // the projection does not depend on the classifier, so each cell matches a
  // standalone run_repeated_cv exactly.
  for (std::size_t w = 0; w < kAllWindows.size(); ++w) {
    const WindowMode window = kAllWindows[w];
    const Eigen::MatrixXd x = feature_matrix(dataset, window, features);
    parallel_for(runs_per_cell, jobs, [&](std::size_t run) {
      const int r = static_cast<int>(run) / plan.folds;
      const int f = static_cast<int>(run) % plan.folds;
      const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(r);
      std::vector<int> train;
      for (int g = 0; g < plan.folds; ++g)
        if (g != f) train.insert(train.end(), splits[r][g].begin(), splits[r][g].end());
      const std::vector<int>& test = splits[r][f];

      ClassifierKind active = base_model.kind;
      try {
        const Eigen::MatrixXd train_x = take_rows(x, train);
        const PcaModel projection = pca_fit(train_x, features.pca, seed);
        const Eigen::MatrixXd train_z = pca_transform(projection, train_x);
        const Eigen::MatrixXd test_z = pca_transform(projection, take_rows(x, test));
        const Eigen::VectorXi train_y = take_labels(y, train);
        const Eigen::VectorXi test_y = take_labels(y, test);
        for (std::size_t c = 0; c < kAllClassifiers.size(); ++c) {
          active = kAllClassifiers[c];
          ModelConfig model = base_model;
          model.kind = active;
          const FoldOutcome outcome =
              eval_transformed(train_z, train_y, test_z, test_y, projection.k, model, seed);
          cells[c * kAllWindows.size() + w].per_run_f1[run] = outcome.f1;
        }
      } catch (const Error& e) {
        std::ostringstream os;
        os << to_string(active) << "/" << to_string(window) << " repetition " << r << ", fold "
           << f << ": " << e.what();
        raise(e.code(), os.str());
      }
    });
  }

  for (auto& cell : cells) finalize_cell(cell);
  return cells;
}

std::string render_table(const std::vector<CellResult>& cells) {
  std::map<std::pair<int, int>, const CellResult*> by_key;
  for (const auto& cell : cells)
    by_key[{static_cast<int>(cell.classifier), static_cast<int>(cell.window)}] = &cell;

  std::vector<ClassifierKind> rows;
  for (ClassifierKind kind : kAllClassifiers)
    for (WindowMode window : kAllWindows)
      if (by_key.count({static_cast<int>(kind), static_cast<int>(window)})) {
        rows.push_back(kind);
        break;
      }
  std::vector<WindowMode> columns;
  for (WindowMode window : kAllWindows)
    for (ClassifierKind kind : kAllClassifiers)
      if (by_key.count({static_cast<int>(kind), static_cast<int>(window)})) {
        columns.push_back(window);
        break;
      }

  constexpr std::size_t kLabelWidth = 12;
  constexpr std::size_t kCellWidth = 17;  // "0.7091 ± 0.0224" plus two spaces
  std::ostringstream os;
  os << pad_display("Classifier", kLabelWidth);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::string name = to_string(columns[j]);
    os << (j + 1 < columns.size() ? pad_display(name, kCellWidth) : name);
  }
  os << "\n";
  for (ClassifierKind kind : rows) {
    os << pad_display(to_string(kind), kLabelWidth);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const auto it = by_key.find({static_cast<int>(kind), static_cast<int>(columns[j])});
      const std::string text =
          it != by_key.end() ? format_cell(it->second->f1_mean, it->second->f1_std)
                             : std::string("-");
      os << (j + 1 < columns.size() ? pad_display(text, kCellWidth) : text);
    }
    os << "\n";
  }
  return os.str();
}

std::string report_json(const std::vector<CellResult>& cells,
                        const std::string& config_fingerprint) {
  nlohmann::ordered_json report;
  report["config_fingerprint"] = config_fingerprint;
  report["cells"] = nlohmann::ordered_json::array();
  for (const auto& cell : cells) {
    nlohmann::ordered_json entry;
    entry["classifier"] = to_string(cell.classifier);
    entry["window"] = to_string(cell.window);
    entry["f1_mean"] = cell.f1_mean;
    entry["f1_std"] = cell.f1_std;
    entry["per_run"] = cell.per_run_f1;
    report["cells"].push_back(std::move(entry));
  }
  return report.dump(2) + "\n";
}

}  // namespace engage
