#include "engage/svm.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "engage/error.hpp"
#include "engage/log.hpp"

namespace engage {

Eigen::MatrixXd kernel_matrix(KernelKind kind, double gamma, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    raise(Err::DimensionMismatch, "kernel operands have different feature counts");
  Eigen::MatrixXd k = a * b.transpose();
  if (kind == KernelKind::Linear) return k;
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  for (long i = 0; i < k.rows(); ++i)
    for (long j = 0; j < k.cols(); ++j)
      k(i, j) = std::exp(-gamma * std::max(0.0, a2[i] + b2[j] - 2.0 * k(i, j)));
  return k;
}

SvmModel svm_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const SvmConfig& config) {
  const long n = x.rows();
  if (n != y.size()) raise(Err::LengthMismatch, "row count differs from label count");
  if (!(config.c > 0.0)) raise(Err::InvalidSpec, "C must be positive");
  if (config.kernel == KernelKind::Rbf && !(config.gamma > 0.0))
    raise(Err::InvalidSpec, "gamma must be positive for the RBF kernel");

  Eigen::VectorXd sign(n);
  bool has0 = false, has1 = false;
  for (long i = 0; i < n; ++i) {
    if (y[i] == 0) { sign[i] = -1.0; has0 = true; }
    else if (y[i] == 1) { sign[i] = 1.0; has1 = true; }
    else raise(Err::InvalidSpec, "labels must be 0 or 1");
  }
  if (!has0 || !has1) raise(Err::SingleClass, "both classes required for SVM");

  const Eigen::MatrixXd kmat = kernel_matrix(config.kernel, config.gamma, x, x);
  const double c = config.c;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // of 1/2 a^T Q a - e^T a

  // Movable-up set: alpha can grow along +y; movable-down: along -y.
  auto in_up = [&](long t) { return sign[t] > 0.0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](long t) { return sign[t] > 0.0 ? alpha[t] > 0.0 : alpha[t] < c; };

  double violation = 0.0;
  long iter = 0;
  bool converged = false;
  for (; iter < config.max_iter; ++iter) {
    long i = -1, j = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (long t = 0; t < n; ++t) {
      const double v = -sign[t] * grad[t];
      if (in_up(t) && v > m_up) { m_up = v; i = t; }     // strict: lowest index wins ties
      if (in_low(t) && v < m_low) { m_low = v; j = t; }
    }
    violation = (i >= 0 && j >= 0) ? m_up - m_low : 0.0;
    if (i < 0 || j < 0 || violation <= config.tol) {
      converged = true;
      break;
    }

    double quad = kmat(i, i) + kmat(j, j) - 2.0 * kmat(i, j);
    if (quad <= 0.0) quad = 1e-12;
    // Feasible step along (d_i, d_j) = (y_i, -y_j), clipped to the box.
    const double room_i = sign[i] > 0.0 ? c - alpha[i] : alpha[i];
    const double room_j = sign[j] > 0.0 ? alpha[j] : c - alpha[j];
    const double step = std::min({violation / quad, room_i, room_j});

    alpha[i] += sign[i] * step;
    alpha[j] -= sign[j] * step;
    for (long idx : {i, j}) {  // absorb round-off at the box edges
      if (alpha[idx] < 1e-12 * c) alpha[idx] = 0.0;
      if (alpha[idx] > c * (1.0 - 1e-12)) alpha[idx] = c;
    }
    grad.noalias() +=
        step * (sign.array() * (kmat.col(i) - kmat.col(j)).array()).matrix();
  }

  SvmModel model;
  model.kernel = config.kernel;
  model.gamma = config.gamma;
  model.converged = converged;
  model.iterations = iter;
  model.kkt_violation = std::max(0.0, violation);
  if (!converged)
    log_warn("SMO stopped after " + std::to_string(iter) + " steps with violation " +
             std::to_string(violation));

  // Bias from the midpoint of the active bounds at exit.
  double m_up = -std::numeric_limits<double>::infinity();
  double m_low = std::numeric_limits<double>::infinity();
  for (long t = 0; t < n; ++t) {
    const double v = -sign[t] * grad[t];
    if (in_up(t)) m_up = std::max(m_up, v);
    if (in_low(t)) m_low = std::min(m_low, v);
  }
  if (std::isfinite(m_up) && std::isfinite(m_low)) model.bias = (m_up + m_low) / 2.0;
  else if (std::isfinite(m_up)) model.bias = m_up;
  else if (std::isfinite(m_low)) model.bias = m_low;

  const Eigen::VectorXd coeff_full = alpha.array() * sign.array();
  model.dual_objective = alpha.sum() - 0.5 * coeff_full.dot(kmat * coeff_full);
  model.alpha = alpha;

  long m_sv = 0;
  for (long t = 0; t < n; ++t)
    if (alpha[t] > 0.0) ++m_sv;
  model.support_vectors.resize(m_sv, x.cols());
  model.coeffs.resize(m_sv);
  long cursor = 0;
  for (long t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.row(cursor) = x.row(t);
      model.coeffs[cursor] = coeff_full[t];
      ++cursor;
    }
  }
  return model;
}

Eigen::VectorXd svm_scores(const SvmModel& model, const Eigen::MatrixXd& x) {
  if (model.support_vectors.rows() == 0)
    return Eigen::VectorXd::Constant(x.rows(), model.bias);
  const Eigen::MatrixXd k =
      kernel_matrix(model.kernel, model.gamma, x, model.support_vectors);
  return (k * model.coeffs).array() + model.bias;
}

double svm_score(const SvmModel& model, const Eigen::VectorXd& x) {
  return svm_scores(model, x.transpose())[0];
}

}  // namespace engage
