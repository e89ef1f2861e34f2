#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "engage/pca.hpp"
#include "engage/types.hpp"

namespace engage {

//! Flattens a channels x samples window in channel-major order: all of
//! channel 0, then channel 1, and so on.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& window);

//! Inverse of vectorize for a known channel count.
Eigen::MatrixXd unvectorize(const Eigen::VectorXd& flat, int channels);

struct BandSpec {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

//! theta 4-8, alpha 8-13, beta 13-30, gamma 30-45 Hz.
std::vector<BandSpec> default_bands();

struct WelchConfig {
  double segment_seconds = 2.0;
  double overlap = 0.5;  // fraction of a segment shared with the next
};

//! Welch power spectral density of one signal: mean-removed Hann-windowed
//! segments, one-sided, averaged.  Returns (frequencies, psd).
std::pair<Eigen::VectorXd, Eigen::VectorXd> welch_psd(const Eigen::VectorXd& signal,
                                                      double sample_rate_hz,
                                                      const WelchConfig& config);

//! log10 mean band power per channel, floored at 1e-12 before the log.
//! Result is channels x bands.  A band bin belongs to [low, high).  Throws
//! Err::BandOutOfRange when a band exceeds the Nyquist frequency and
//! Err::TooShort when the window is shorter than one Welch segment.
Eigen::MatrixXd band_power(const Eigen::MatrixXd& window, double sample_rate_hz,
                           const std::vector<BandSpec>& bands, const WelchConfig& config = {});

//! Feature extraction settings for the evaluation pipeline.
struct FeatureConfig {
  std::string kind = "time";  // "time" | "bandpower"
  PcaTarget pca;
  WelchConfig welch;
  std::vector<BandSpec> bands = default_bands();
};

//! Feature row for one epoch under the given window mode and config
//! (pre-PCA; PCA is fit per training fold).
Eigen::VectorXd epoch_features(const Epoch& epoch, WindowMode mode, const FeatureConfig& config);

//! Stacks epoch_features over a dataset: epochs x features.
Eigen::MatrixXd feature_matrix(const Dataset& dataset, WindowMode mode,
                               const FeatureConfig& config);

}  // namespace engage
