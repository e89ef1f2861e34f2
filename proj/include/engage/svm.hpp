#pragma once

#include <Eigen/Dense>

namespace engage {

enum class KernelKind { Linear, Rbf };

struct SvmConfig {
  KernelKind kernel = KernelKind::Rbf;
  double c = 1.0;
  double gamma = 0.1;      // RBF width, exp(-gamma ||u - v||^2)
  double tol = 1e-3;       // KKT stopping threshold
  long max_iter = 100000;  // working-set steps before giving up
};

//! Soft-margin SVM in dual form, trained by sequential minimal optimization
//! with maximal-violating-pair working set selection.  Ties between equally
//! violating indices resolve to the lowest index, so training is
//! deterministic.  score(x) = sum_i alpha_i y_i K(x_i, x) + bias.
struct SvmModel {
  KernelKind kernel = KernelKind::Linear;
  double gamma = 0.0;
  Eigen::MatrixXd support_vectors;  // m x d
  Eigen::VectorXd coeffs;           // m, alpha_i * y_i for each support vector
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
  double dual_objective = 0.0;   // sum(alpha) - 1/2 a^T Q a at exit
  double kkt_violation = 0.0;    // max-pair violation at exit
  Eigen::VectorXd alpha;         // n, full multiplier vector (diagnostics)
};

//! Labels must be 0/1 and both present (Err::SingleClass otherwise).  A fit
//! that exhausts max_iter returns converged == false but is still usable.
SvmModel svm_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const SvmConfig& config);

double svm_score(const SvmModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd svm_scores(const SvmModel& model, const Eigen::MatrixXd& x);

//! Dense kernel matrix between row sets (exposed for tests and the tuner).
Eigen::MatrixXd kernel_matrix(KernelKind kind, double gamma, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

}  // namespace engage
