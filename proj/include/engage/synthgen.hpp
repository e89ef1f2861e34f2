#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "engage/stats.hpp"
#include "engage/types.hpp"

namespace engage {

//! Deterministic synthetic-EEG recipe.  High-engagement ads carry a frontal
//! theta-band oscillatory signature on AF3, F7, F8, AF4 whose per-channel
//! phases step by 90 degrees, so the four channels cancel in the frontal
//! mean.  The two carriers and their first-block phases are drawn once per
//! dataset and shared by every high epoch, which keeps the first 30 s
//! aligned across epochs; each epoch adds an amplitude jitter, the
//! amplitude steps down by `snr_decay_db_per_30s` at every 30 s block
//! boundary, and beyond the first block only a minority of epochs stay
//! carrier-locked while the rest wander in frequency and phase.  Every epoch
//! additionally carries a bank of ongoing alpha/beta background rhythms with
//! dataset-level frequencies and topographies; each rhythm flips between a
//! high- and a low-amplitude state by a fair per-epoch coin, independent of
//! the label, giving every window strong label-free structure shared across
//! epochs.  Noise is a pink + white mix per channel; blinks are
//! raised-cosine bumps on the frontal channels at `artifact_rate_per_min`,
//! sized to trigger the ICA component-rejection stage but never the
//! epoch-level amplitude gate.  A smooth amplifier-style limiter bounds
//! every sample inside +-100 uV regardless of how the parts stack.
struct GeneratorSpec {
  int n_ads = 100;
  int n_subjects = 1;
  double sample_rate_hz = 128.0;
  double epoch_seconds = 60.0;
  // Target positive fraction of ads; the realized count stays within one of
  // balance * n_ads.  A request of exactly one half rounds down so negatives
  // hold a strict majority (an even split would let a constant all-positive
  // predictor tie chance-level F1 on shuffled-label sanity runs).
  double label_balance = 0.5;
  double signal_snr_db = 6.0;        // first-block per-channel signal/noise power
  double snr_decay_db_per_30s = 3.0;
  double artifact_rate_per_min = 2.0;
  double drop_rate = 0.0;            // chance an (ad, subject) epoch is skipped
  double amp_jitter_db = 4.0;        // per-epoch SNR offset, uniform in +/- this
  double pink_noise_uv = 7.0;
  double white_noise_uv = 3.0;
  int n_annotators = 5;
  std::uint64_t seed = 42;
};

//! Throws Err::InvalidSpec describing the first violated field.
void validate_generator_spec(const GeneratorSpec& spec);

struct GeneratedData {
  Dataset dataset;                     // labeled epochs, emotiv14 layout
  RatingTable ratings;                 // aggregate_labels reproduces ad_labels
  std::map<std::string, int> ad_labels;  // planted per-ad ground truth
};

//! Fully deterministic per seed; epoch content depends only on
//! (seed, ad index, subject index), so dropping or reordering ads never
//! changes the others.
GeneratedData generate_dataset(const GeneratorSpec& spec);

}  // namespace engage
