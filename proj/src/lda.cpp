#include "engage/lda.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "engage/error.hpp"

namespace engage {

LdaModel lda_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const LdaConfig& config) {
  const long n = x.rows();
  const long d = x.cols();
  if (n != y.size()) raise(Err::LengthMismatch, "row count differs from label count");

  long n0 = 0, n1 = 0;
  for (long i = 0; i < n; ++i) {
    if (y[i] == 0) ++n0;
    else if (y[i] == 1) ++n1;
    else raise(Err::InvalidSpec, "labels must be 0 or 1");
  }
  if (n0 == 0 || n1 == 0) raise(Err::SingleClass, "both classes required for LDA");

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
  for (long i = 0; i < n; ++i)
    (y[i] == 0 ? mu0 : mu1) += x.row(i).transpose();
  mu0 /= static_cast<double>(n0);
  mu1 /= static_cast<double>(n1);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd dev = x.row(i).transpose() - (y[i] == 0 ? mu0 : mu1);
    scatter.noalias() += dev * dev.transpose();
  }
  const Eigen::MatrixXd pooled = scatter / static_cast<double>(std::max<long>(1, n - 2));

  const double s = config.shrinkage;
  if (s < 0.0 || s > 1.0) raise(Err::InvalidSpec, "shrinkage must be in [0, 1]");
  Eigen::MatrixXd sw = (1.0 - s) * pooled;
  sw.diagonal().array() += s * pooled.trace() / static_cast<double>(d);

  const Eigen::VectorXd diff = mu1 - mu0;
  const Eigen::LDLT<Eigen::MatrixXd> solver(sw);
  LdaModel model;
  bool solved = solver.info() == Eigen::Success;
  if (solved) {
    model.weights = solver.solve(diff);
    const double residual = (sw * model.weights - diff).norm();
    solved = std::isfinite(residual) && residual <= 1e-8 * (1.0 + diff.norm());
  }
  if (!solved)
    raise(Err::SingularCovariance,
          "within-class covariance is singular; use a positive shrinkage");

  const double prior_shift =
      std::log(static_cast<double>(n1) / static_cast<double>(n0));
  model.bias = -model.weights.dot((mu0 + mu1) / 2.0) + prior_shift;
  return model;
}

double lda_score(const LdaModel& model, const Eigen::VectorXd& x) {
  return model.weights.dot(x) + model.bias;
}

Eigen::VectorXd lda_scores(const LdaModel& model, const Eigen::MatrixXd& x) {
  return (x * model.weights).array() + model.bias;
}

}  // namespace engage
