#include "engage/features.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <numbers>

#include "engage/error.hpp"
#include "engage/preprocess.hpp"

namespace engage {

Eigen::VectorXd vectorize(const Eigen::MatrixXd& window) {
  Eigen::VectorXd flat(window.size());
  long cursor = 0;
  for (long ch = 0; ch < window.rows(); ++ch) {
    flat.segment(cursor, window.cols()) = window.row(ch).transpose();
    cursor += window.cols();
  }
  return flat;
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& flat, int channels) {
  if (channels <= 0 || flat.size() % channels != 0)
    raise(Err::DimensionMismatch, "flat length " + std::to_string(flat.size()) +
                                      " is not divisible by " + std::to_string(channels) +
                                      " channels");
  const long samples = flat.size() / channels;
  Eigen::MatrixXd window(channels, samples);
  for (int ch = 0; ch < channels; ++ch)
    window.row(ch) = flat.segment(ch * samples, samples).transpose();
  return window;
}

std::vector<BandSpec> default_bands() {
  return {{"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}, {"beta", 13.0, 30.0}, {"gamma", 30.0, 45.0}};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> welch_psd(const Eigen::VectorXd& signal,
                                                      double fs, const WelchConfig& config) {
  const long seg = std::lround(config.segment_seconds * fs);
  if (seg < 2) raise(Err::InvalidSpec, "Welch segment must span at least 2 samples");
  if (signal.size() < seg)
    raise(Err::TooShort, "need at least " + std::to_string(seg) + " samples, got " +
                             std::to_string(signal.size()));
  if (!(config.overlap >= 0.0) || config.overlap >= 1.0)
    raise(Err::InvalidSpec, "overlap must be in [0, 1)");
  const long hop = std::max<long>(1, seg - std::lround(config.overlap * static_cast<double>(seg)));

  Eigen::VectorXd hann(seg);
  for (long i = 0; i < seg; ++i)
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(seg)));
  const double win_power = hann.squaredNorm();

  const long bins = seg / 2 + 1;
  Eigen::VectorXd psd = Eigen::VectorXd::Zero(bins);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  std::vector<double> buffer(seg);
  long segments = 0;
  for (long start = 0; start + seg <= signal.size(); start += hop) {
    Eigen::Map<Eigen::VectorXd> chunk(buffer.data(), seg);
    chunk = signal.segment(start, seg);
    chunk.array() -= chunk.mean();  // per-segment mean removal
    chunk.array() *= hann.array();
    fft.fwd(spectrum, buffer);
    for (long k = 0; k < bins; ++k) {
      double power = std::norm(spectrum[k]) / (fs * win_power);
      if (k != 0 && !(seg % 2 == 0 && k == bins - 1)) power *= 2.0;  // one-sided
      psd[k] += power;
    }
    ++segments;
  }
  psd /= static_cast<double>(segments);

  Eigen::VectorXd freqs(bins);
  for (long k = 0; k < bins; ++k) freqs[k] = static_cast<double>(k) * fs / static_cast<double>(seg);
  return {freqs, psd};
}

Eigen::MatrixXd band_power(const Eigen::MatrixXd& window, double fs,
                           const std::vector<BandSpec>& bands, const WelchConfig& config) {
  if (bands.empty()) raise(Err::InvalidSpec, "no bands given");
  for (const auto& band : bands) {
    if (!(band.low_hz >= 0.0) || !(band.high_hz > band.low_hz) ||
        band.high_hz > fs / 2.0 + 1e-9)
      raise(Err::BandOutOfRange, "band '" + band.name + "' [" + std::to_string(band.low_hz) +
                                     ", " + std::to_string(band.high_hz) +
                                     "] outside (0, " + std::to_string(fs / 2.0) + "]");
  }
  constexpr double kLogFloor = 1e-12;
  Eigen::MatrixXd out(window.rows(), static_cast<long>(bands.size()));
  for (long ch = 0; ch < window.rows(); ++ch) {
    const auto [freqs, psd] = welch_psd(window.row(ch).transpose(), fs, config);
    for (size_t b = 0; b < bands.size(); ++b) {
      double total = 0.0;
      long count = 0;
      for (long k = 0; k < freqs.size(); ++k) {
        if (freqs[k] >= bands[b].low_hz && freqs[k] < bands[b].high_hz) {
          total += psd[k];
          ++count;
        }
      }
      const double mean_power = count > 0 ? total / static_cast<double>(count) : 0.0;
      out(ch, static_cast<long>(b)) = std::log10(std::max(mean_power, kLogFloor));
    }
  }
  return out;
}

Eigen::VectorXd epoch_features(const Epoch& epoch, WindowMode mode, const FeatureConfig& config) {
  const Eigen::MatrixXd window = segment_window(epoch, mode);
  if (config.kind == "time") return vectorize(window);
  if (config.kind == "bandpower")
    return vectorize(band_power(window, epoch.sample_rate_hz, config.bands, config.welch));
  raise(Err::InvalidSpec, "unknown feature kind '" + config.kind + "'");
}

Eigen::MatrixXd feature_matrix(const Dataset& dataset, WindowMode mode,
                               const FeatureConfig& config) {
  if (dataset.epochs.empty()) raise(Err::Empty, "dataset has no epochs");
  const Eigen::VectorXd first = epoch_features(dataset.epochs[0], mode, config);
  Eigen::MatrixXd x(static_cast<long>(dataset.epochs.size()), first.size());
  x.row(0) = first.transpose();
  for (size_t i = 1; i < dataset.epochs.size(); ++i)
    x.row(static_cast<long>(i)) =
        epoch_features(dataset.epochs[i], mode, config).transpose();
  return x;
}

}  // namespace engage
