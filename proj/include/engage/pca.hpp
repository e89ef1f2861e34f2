#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace engage {

//! Component-count selection: an explicit k wins when positive; otherwise
//! the smallest k whose cumulative explained variance reaches
//! `explained_fraction`.  Either way k never exceeds n_train - 1 or the
//! numerical rank of the training data.
struct PcaTarget {
  int k = 0;
  double explained_fraction = 0.95;
};

struct PcaModel {
  Eigen::MatrixXd components;          // k x d, orthonormal rows
  Eigen::VectorXd mean;                // d
  Eigen::VectorXd explained_variance;  // k, non-increasing sample variances
  double total_variance = 0.0;         // trace of the sample covariance
  int k = 0;
};

//! Principal components of X (rows are samples).  Uses the d x d covariance
//! eigendecomposition when d <= n and the n x n Gram route otherwise; both
//! yield the eigenvalues of the sample covariance (n - 1 normalization).
//! Component signs are fixed so each row's largest-magnitude entry is
//! positive.  Throws Err::DegenerateData when total variance is zero,
//! Err::TooShort when n < 2.  The seed parameter exists for interface
//! uniformity; the decomposition is deterministic.
PcaModel pca_fit(const Eigen::MatrixXd& x, const PcaTarget& target, std::uint64_t seed = 0);

//! Projects rows of X into component space: (X - mean) * components^T.
//! Throws Err::DimensionMismatch when the column count differs from the fit.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);

//! Back-projection: Y * components + mean.
Eigen::MatrixXd pca_inverse(const PcaModel& model, const Eigen::MatrixXd& y);

}  // namespace engage
