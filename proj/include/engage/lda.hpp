#pragma once

#include <Eigen/Dense>

namespace engage {

struct LdaConfig {
  double shrinkage = 1e-3;  // 0 disables regularization
};

//! Fisher discriminant: score(x) = weights . x + bias, label 1 when >= 0.
struct LdaModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

//! weights solve Sw w = mu1 - mu0 with the within-class covariance
//! Sw = (1 - s) * pooled + s * (trace(pooled)/d) * I.  The bias places the
//! boundary at the midpoint of the projected class means shifted by the
//! log-ratio of class priors.  Labels must be 0/1.  Throws Err::SingleClass
//! when only one class is present and Err::SingularCovariance when the
//! regularized Sw cannot be solved.
LdaModel lda_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const LdaConfig& config);

double lda_score(const LdaModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd lda_scores(const LdaModel& model, const Eigen::MatrixXd& x);

}  // namespace engage
