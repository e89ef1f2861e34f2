#include "engage/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "engage/error.hpp"
#include "engage/rng.hpp"

namespace engage {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBlockSeconds = 30.0;

//! Fraction of high-engagement epochs whose signature stays locked to the
//! dataset carriers after the first block; the rest wander in frequency and
//! phase, so late windows are only partially decodable by design.
constexpr double kSustainProbability = 0.4;
constexpr double kCarrierWanderHz = 0.5;

//! Signature carriers and their phase steps; equal amplitudes with these
//! offsets sum to zero at every instant, keeping the signature out of the
//! frontal-channel mean that the artifact-rejection rule correlates with.
constexpr std::array<int, 4> kSignatureChannels = {0, 1, 12, 13};  // AF3 F7 F8 AF4
constexpr std::array<double, 4> kSignaturePhase = {0.0, 0.25 * kTwoPi, 0.5 * kTwoPi,
                                                   0.75 * kTwoPi};

//! Ongoing background rhythms: a bank of alpha/beta-band oscillations, each
//! with a dataset-level frequency and scalp topography, waxing and waning
//! between a high- and a low-amplitude state by a fair per-epoch coin that is
//! independent of the label (the subject drifting in and out of relaxed
//! wakefulness).  These shared, label-free directions dominate the variance
//! a train-fitted PCA can generalize to held-out epochs, so chance-level
//! fits (e.g. on shuffled labels) spread their scores across both sides of
//! the decision threshold instead of collapsing onto one class whenever the
//! training fold leans a couple of items toward it.
constexpr int kModeCount = 8;
constexpr double kModeFreqMinHz = 8.0;   // stays clear of the theta signature
constexpr double kModeFreqMaxHz = 40.0;  // stays inside the default band-pass
constexpr double kModeHighMinUv = 6.0;
constexpr double kModeHighMaxUv = 12.0;
constexpr double kModeLowMinUv = 1.0;
constexpr double kModeLowMaxUv = 3.0;

struct BackgroundMode {
  double freq_hz = 0.0;
  std::array<double, 14> weights{};  // per-channel topography, peak 1
};

//! Smooth amplitude limiter: identity below the knee, tanh saturation above,
//! asymptotically bounded by kSoftClipMaxUv.  Keeps every generated sample
//! strictly inside +-100 uV (like a recording amplifier's input range) no
//! matter how noise peaks, rhythms, signature, and blinks happen to stack.
constexpr double kSoftClipKneeUv = 75.0;
constexpr double kSoftClipMaxUv = 100.0;

double soft_clip(double x) {
  const double mag = std::abs(x);
  if (mag <= kSoftClipKneeUv) return x;
  constexpr double span = kSoftClipMaxUv - kSoftClipKneeUv;
  const double limited = kSoftClipKneeUv + span * std::tanh((mag - kSoftClipKneeUv) / span);
  return x < 0.0 ? -limited : limited;
}

//! Blink topography: strongest at the eyes, leaking into the frontal line.
constexpr std::array<std::pair<int, double>, 6> kBlinkWeights = {{
    {0, 1.0},   // AF3
    {13, 1.0},  // AF4
    {1, 0.7},   // F7
    {12, 0.7},  // F8
    {2, 0.3},   // F3
    {11, 0.3},  // F4
}};

//! Voss-McCartney pink noise: one of 16 held rows is refreshed per sample
//! (row index = trailing zeros of a counter), plus a fresh top-octave term.
class PinkNoise {
 public:
  template <typename Rng>
  void init(Rng& rng) {
    sum_ = 0.0;
    for (auto& row : rows_) {
      row = gaussian(rng);
      sum_ += row;
    }
    counter_ = 0;
  }

  template <typename Rng>
  double next(Rng& rng) {
    ++counter_;
    int idx = 0;
    std::uint64_t c = counter_;
    while ((c & 1ULL) == 0ULL && idx < 15) {
      c >>= 1;
      ++idx;
    }
    sum_ -= rows_[static_cast<std::size_t>(idx)];
    rows_[static_cast<std::size_t>(idx)] = gaussian(rng);
    sum_ += rows_[static_cast<std::size_t>(idx)];
    return (sum_ + gaussian(rng)) / std::sqrt(17.0);
  }

 private:
  std::array<double, 16> rows_{};
  double sum_ = 0.0;
  std::uint64_t counter_ = 0;
};

template <typename Rng>
int poisson_count(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  int count = 0;
  double product = uniform01(rng);
  while (product > limit) {
    ++count;
    product *= uniform01(rng);
  }
  return count;
}

std::string zero_padded(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return buf;
}

//! Engagement multisets per class; per-class ad means are constant for any
//! annotator count, so the grand mean always falls strictly between them
//! and thresholding reproduces the planted labels exactly.
int engagement_rating(int label, int annotator) {
  constexpr std::array<int, 5> kHigh = {4, 3, 4, 3, 2};
  constexpr std::array<int, 5> kLow = {0, 1, 0, 1, 2};
  const auto& pool = label == 1 ? kHigh : kLow;
  return pool[static_cast<std::size_t>(annotator) % pool.size()];
}

}  // namespace

void validate_generator_spec(const GeneratorSpec& spec) {
  const auto fail = [](const std::string& msg) { raise(Err::InvalidSpec, msg); };
  if (spec.n_ads < 2) fail("n_ads must be at least 2, got " + std::to_string(spec.n_ads));
  if (spec.n_subjects < 1)
    fail("n_subjects must be at least 1, got " + std::to_string(spec.n_subjects));
  if (!(spec.sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  if (!(spec.epoch_seconds > 0.0)) fail("epoch_seconds must be positive");
  if (!(spec.label_balance > 0.0) || !(spec.label_balance < 1.0))
    fail("label_balance must lie strictly between 0 and 1");
  if (!std::isfinite(spec.signal_snr_db)) fail("signal_snr_db must be finite");
  if (!(spec.snr_decay_db_per_30s >= 0.0)) fail("snr_decay_db_per_30s must be >= 0");
  if (!(spec.artifact_rate_per_min >= 0.0)) fail("artifact_rate_per_min must be >= 0");
  if (!(spec.drop_rate >= 0.0) || !(spec.drop_rate < 1.0))
    fail("drop_rate must lie in [0, 1)");
  if (!(spec.amp_jitter_db >= 0.0)) fail("amp_jitter_db must be >= 0");
  if (!(spec.pink_noise_uv >= 0.0) || !(spec.white_noise_uv >= 0.0))
    fail("noise amplitudes must be >= 0");
  if (!(spec.pink_noise_uv + spec.white_noise_uv > 0.0)) fail("noise model must be nonzero");
  if (spec.n_annotators < 1)
    fail("n_annotators must be at least 1, got " + std::to_string(spec.n_annotators));
}

GeneratedData generate_dataset(const GeneratorSpec& spec) {
  validate_generator_spec(spec);

  const double fs = spec.sample_rate_hz;
  const long n_baseline = std::lround(fs);
  const long n_stimulus = std::lround(spec.epoch_seconds * fs);
  if (n_stimulus < 2) raise(Err::InvalidSpec, "epoch_seconds too short for the sample rate");

  GeneratedData out;
  out.dataset.layout = ChannelLayout::emotiv14();
  const int channels = out.dataset.layout.size();

  // Dataset-level draws: the signature carrier pair with its first-block
  // phases (shared by every high epoch, which is what makes the first
  // window learnable across epochs), then the label assignment.
  std::mt19937_64 master(mix64(spec.seed));
  const double f1 = 4.5 + 1.3 * uniform01(master);  // [4.5, 5.8] Hz
  const double f2 = 6.0 + 1.4 * uniform01(master);  // [6.0, 7.4] Hz
  const double phase1 = kTwoPi * uniform01(master);
  const double phase2 = kTwoPi * uniform01(master);

  int n_positive = static_cast<int>(std::lround(spec.label_balance * spec.n_ads));
  n_positive = std::clamp(n_positive, 1, spec.n_ads - 1);
  // An exactly even split lets a constant always-positive predictor tie
  // honest chance performance on shuffled-label sanity runs (its F1 is 2/3
  // on balanced folds), so a half-and-half request rounds down: negatives
  // hold a strict majority and degenerate fits score as failures instead.
  if (spec.label_balance <= 0.5 && 2 * n_positive >= spec.n_ads && n_positive > 1) --n_positive;
  std::vector<int> ad_order(static_cast<std::size_t>(spec.n_ads));
  for (int a = 0; a < spec.n_ads; ++a) ad_order[static_cast<std::size_t>(a)] = a;
  portable_shuffle(ad_order, master);
  std::vector<int> label_of(static_cast<std::size_t>(spec.n_ads), 0);
  for (int i = 0; i < n_positive; ++i) label_of[static_cast<std::size_t>(ad_order[i])] = 1;

  // Background rhythm bank: frequencies and topographies are dataset-wide,
  // so each mode spans the same two feature-space directions (its sine and
  // cosine shapes) in every epoch; amplitude and phase vary per epoch.
  std::array<BackgroundMode, kModeCount> modes;
  for (auto& mode : modes) {
    mode.freq_hz = kModeFreqMinHz + (kModeFreqMaxHz - kModeFreqMinHz) * uniform01(master);
    double peak = 0.0;
    for (auto& w : mode.weights) {
      w = 2.0 * uniform01(master) - 1.0;
      peak = std::max(peak, std::abs(w));
    }
    for (auto& w : mode.weights) w /= peak;
  }

  std::vector<std::string> ad_ids(static_cast<std::size_t>(spec.n_ads));
  for (int a = 0; a < spec.n_ads; ++a) {
    ad_ids[static_cast<std::size_t>(a)] = zero_padded("ad", a + 1, 3);
    out.ad_labels[ad_ids[static_cast<std::size_t>(a)]] = label_of[static_cast<std::size_t>(a)];
  }

  const double blink_lambda = spec.artifact_rate_per_min * spec.epoch_seconds / 60.0;
  PinkNoise pink;

  for (int s = 0; s < spec.n_subjects; ++s) {
    const std::string subject_id = zero_padded("s", s + 1, 2);
    for (int a = 0; a < spec.n_ads; ++a) {
      // Epoch content depends only on (seed, ad, subject).
      std::mt19937_64 rng(
          mix64(spec.seed ^ mix64(static_cast<std::uint64_t>(a) * 1000003ULL +
                                  static_cast<std::uint64_t>(s))));
      // Always consume the drop draw so epoch content is identical across
      // drop_rate settings, as the header promises.
      const double drop_draw = uniform01(rng);
      if (drop_draw < spec.drop_rate) continue;

      Epoch epoch;
      epoch.id = subject_id + "_" + ad_ids[static_cast<std::size_t>(a)];
      epoch.subject_id = subject_id;
      epoch.ad_id = ad_ids[static_cast<std::size_t>(a)];
      epoch.sample_rate_hz = fs;
      epoch.label = label_of[static_cast<std::size_t>(a)];
      epoch.baseline.resize(channels, n_baseline);
      epoch.stimulus.resize(channels, n_stimulus);

      // Background: per-channel DC offset plus pink + white noise.
      for (int ch = 0; ch < channels; ++ch) {
        const double offset = 20.0 * uniform01(rng) - 10.0;
        pink.init(rng);
        for (long t = 0; t < n_baseline; ++t)
          epoch.baseline(ch, t) =
              offset + spec.pink_noise_uv * pink.next(rng) + spec.white_noise_uv * gaussian(rng);
        for (long t = 0; t < n_stimulus; ++t)
          epoch.stimulus(ch, t) =
              offset + spec.pink_noise_uv * pink.next(rng) + spec.white_noise_uv * gaussian(rng);
      }

      if (epoch.label == 1) {
        // Calibrate the signature against this epoch's measured noise power
        // on the carrier channels, so the first block sits at exactly the
        // requested SNR before the per-epoch jitter.
        double noise_power = 0.0;
        for (int ch : kSignatureChannels) {
          const auto row = epoch.stimulus.row(ch);
          const double mean = row.mean();
          noise_power += (row.array() - mean).square().mean();
        }
        noise_power /= static_cast<double>(kSignatureChannels.size());

        const double jitter = spec.amp_jitter_db * (2.0 * uniform01(rng) - 1.0);
        const double snr = std::pow(10.0, (spec.signal_snr_db + jitter) / 10.0);
        // Two carriers of amplitude A carry A^2 total power per channel.
        const double base_amp = std::sqrt(noise_power * snr);
        const bool sustained = uniform01(rng) < kSustainProbability;
        const int n_blocks =
            1 + static_cast<int>((static_cast<double>(n_stimulus - 1) / fs) / kBlockSeconds);

        for (int block = 0; block < n_blocks; ++block) {
          const long t_lo = std::lround(block * kBlockSeconds * fs);
          const long t_hi = std::min(n_stimulus, std::lround((block + 1) * kBlockSeconds * fs));
          const double amp =
              base_amp * std::pow(10.0, -spec.snr_decay_db_per_30s * block / 20.0);
          // First block (and sustained epochs throughout): the dataset
          // carrier pair with its shared phases.  Unsustained later blocks
          // re-draw frequency and phase per epoch, which breaks cross-epoch
          // alignment while keeping the power inside the theta band.
          double fb1 = f1;
          double fb2 = f2;
          double pb1 = phase1;
          double pb2 = phase2;
          bool relative_time = false;
          if (block > 0 && !sustained) {
            fb1 = f1 + kCarrierWanderHz * (2.0 * uniform01(rng) - 1.0);
            fb2 = f2 + kCarrierWanderHz * (2.0 * uniform01(rng) - 1.0);
            pb1 = kTwoPi * uniform01(rng);
            pb2 = kTwoPi * uniform01(rng);
            relative_time = true;
          }
          for (long t = t_lo; t < t_hi; ++t) {
            const double seconds =
                static_cast<double>(relative_time ? t - t_lo : t) / fs;
            const double arg1 = kTwoPi * fb1 * seconds + pb1;
            const double arg2 = kTwoPi * fb2 * seconds + pb2;
            for (std::size_t c = 0; c < kSignatureChannels.size(); ++c) {
              epoch.stimulus(kSignatureChannels[c], t) +=
                  amp *
                  (std::cos(arg1 + kSignaturePhase[c]) + std::cos(arg2 + kSignaturePhase[c]));
            }
          }
        }
      }

      // Background rhythms: continuous across baseline and stimulus, on
      // every epoch regardless of label.  A fair coin per mode picks the
      // amplitude state; the phase is free-running between epochs.
      for (const auto& mode : modes) {
        const bool high = uniform01(rng) < 0.5;
        const double amp =
            high ? kModeHighMinUv + (kModeHighMaxUv - kModeHighMinUv) * uniform01(rng)
                 : kModeLowMinUv + (kModeLowMaxUv - kModeLowMinUv) * uniform01(rng);
        const double phase = kTwoPi * uniform01(rng);
        auto mode_at = [&](double seconds) {
          return amp * std::sin(kTwoPi * mode.freq_hz * seconds + phase);
        };
        for (long t = 0; t < n_baseline; ++t) {
          const double value = mode_at(static_cast<double>(t - n_baseline) / fs);
          for (int ch = 0; ch < channels; ++ch)
            epoch.baseline(ch, t) += value * mode.weights[static_cast<std::size_t>(ch)];
        }
        for (long t = 0; t < n_stimulus; ++t) {
          const double value = mode_at(static_cast<double>(t) / fs);
          for (int ch = 0; ch < channels; ++ch)
            epoch.stimulus(ch, t) += value * mode.weights[static_cast<std::size_t>(ch)];
        }
      }

      // Blink bumps: 0.3 s raised cosines on the frontal line.
      const int blinks = poisson_count(blink_lambda, rng);
      const long blink_len = std::max<long>(2, std::lround(0.3 * fs));
      for (int b = 0; b < blinks; ++b) {
        const long start = static_cast<long>(uniform01(rng) *
                                             static_cast<double>(n_stimulus - blink_len));
        // Capped so that background plus rhythms plus a blink stays under
        // the default 300 uV peak-to-peak quality gate: blinks are for the
        // component-rejection stage, not the epoch-drop stage.
        const double amp = 60.0 * (0.8 + 0.4 * uniform01(rng));
        for (long t = 0; t < blink_len; ++t) {
          const double bump =
              0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(t) /
                                    static_cast<double>(blink_len - 1)));
          for (const auto& [ch, weight] : kBlinkWeights)
            epoch.stimulus(ch, start + t) += amp * weight * bump;
        }
      }

      epoch.baseline = epoch.baseline.unaryExpr([](double x) { return soft_clip(x); });
      epoch.stimulus = epoch.stimulus.unaryExpr([](double x) { return soft_clip(x); });
      out.dataset.epochs.push_back(std::move(epoch));
    }
  }

  // Ratings: engagement from the per-class multisets; arousal loosely
  // tracks engagement, valence is free-running.
  std::mt19937_64 rating_rng(mix64(spec.seed ^ 0x726174696e6773ULL));
  for (int a = 0; a < spec.n_ads; ++a) {
    for (int j = 0; j < spec.n_annotators; ++j) {
      RatingRecord rec;
      rec.annotator_id = zero_padded("annot", j + 1, 2);
      rec.ad_id = ad_ids[static_cast<std::size_t>(a)];
      rec.engagement = engagement_rating(label_of[static_cast<std::size_t>(a)], j);
      const int wiggle = static_cast<int>(rating_rng() % 3) - 1;
      rec.arousal = std::clamp(rec.engagement + wiggle, 0, 4);
      rec.valence = static_cast<int>(rating_rng() % 5) - 2;
      out.ratings.records.push_back(std::move(rec));
    }
  }

  return out;
}

}  // namespace engage
