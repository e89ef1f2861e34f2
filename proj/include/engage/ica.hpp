#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace engage {

struct IcaConfig {
  int k = 0;             // components to extract; 0 means one per channel
  int max_iter = 200;
  double tol = 1e-4;
  std::uint64_t seed = 0;  // seeds the initial rotation
};

//! FastICA decomposition.  sources = unmixing * (X - mean); X is
//! approximated by mixing * sources + mean.  Component time courses have
//! unit sample variance; unmixing * mixing is the identity.
struct IcaModel {
  Eigen::MatrixXd unmixing;   // k x channels
  Eigen::MatrixXd mixing;     // channels x k
  Eigen::MatrixXd whitening;  // k x channels; whitening * (X - mean) has identity covariance
  Eigen::VectorXd mean;       // per-channel mean of the training data
  bool converged = false;
  int iterations = 0;
};

//! Symmetric FastICA with the log-cosh contrast on eigenvalue-whitened data.
//! Deterministic for a fixed seed.  Throws Err::RankDeficient when the data
//! covariance has numerical rank below k, Err::TooShort when there are
//! fewer than 10 samples per channel, Err::InvalidSpec for k outside
//! [1, channels].
IcaModel fit_ica(const Eigen::MatrixXd& data, const IcaConfig& config);

//! Component time courses for arbitrary data under a fitted model.
Eigen::MatrixXd ica_sources(const IcaModel& model, const Eigen::MatrixXd& data);

//! Rejection rules for artifact-bearing components.  A component is dropped
//! when its excess-kurtosis z-score (taken across components) exceeds
//! `kurtosis_z`, or when its time course correlates with the mean of the
//! frontal channels beyond `frontal_corr` in absolute value.
struct ArtifactCriteria {
  double kurtosis_z = 3.0;
  double frontal_corr = 0.7;
  std::vector<int> frontal_channels = {0, 1, 12, 13};  // AF3, F7, F8, AF4
};

struct CleanResult {
  Eigen::MatrixXd cleaned;    // channels x samples
  std::vector<int> rejected;  // indices of dropped components, ascending
  bool all_rejected = false;  // every component dropped; cleaned holds means
};

//! Zeroes rejected component rows and projects back to channel space.
CleanResult reject_artifact_components(const IcaModel& model, const Eigen::MatrixXd& data,
                                       const ArtifactCriteria& criteria);

//! Excess kurtosis of every row (population moments); exposed for tests.
Eigen::VectorXd row_kurtosis(const Eigen::MatrixXd& rows);

}  // namespace engage
