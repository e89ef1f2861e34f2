#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "engage/filter.hpp"
#include "engage/ica.hpp"
#include "engage/types.hpp"

namespace engage {

//! Epoch-level quality gates applied before any filtering.
struct NoisyCriteria {
  double max_peak_to_peak_uv = 300.0;  // saturation / motion guard
  double flatline_uv = 0.01;           // dead-channel guard
};

//! True when any channel's peak-to-peak amplitude over the stimulus window
//! exceeds the maximum or falls below the flatline threshold.
bool detect_noisy_epoch(const Epoch& epoch, const NoisyCriteria& criteria);

//! Subtracts each channel's baseline mean from the stimulus window.  The
//! baseline itself is kept as recorded unless `shift_baseline` is set, in
//! which case the same offset is removed there too (making the operation
//! idempotent).  Throws Err::EmptyBaseline when there is no baseline.
Epoch baseline_subtract(const Epoch& epoch, bool shift_baseline = false);

//! Stimulus-window cut for the given mode (channels x window_samples(mode)).
//! Throws Err::TooShort naming needed and available sample counts.
Eigen::MatrixXd segment_window(const Epoch& epoch, WindowMode mode);

//! Full cleaning configuration.  Frontal channels are named here and
//! resolved against the dataset layout when the pipeline runs.
struct PreprocessConfig {
  bool bandpass_enabled = true;
  BandpassSpec bandpass;
  IcaConfig ica;
  double kurtosis_z = 3.0;
  double frontal_corr = 0.7;
  std::vector<std::string> frontal_channels = {"AF3", "AF4", "F7", "F8"};
  NoisyCriteria noisy;
};

struct SubjectIcaOutcome {
  std::string subject_id;
  std::vector<int> rejected_components;
  bool converged = false;
  int iterations = 0;
  bool all_rejected = false;
};

struct PreprocessReport {
  std::vector<std::string> dropped_noisy_epochs;  // ids, manifest order
  std::vector<SubjectIcaOutcome> ica_runs;        // one per subject
};

//! Cleaning pipeline: drop noisy epochs, band-pass filter baseline and
//! stimulus as one continuous record, remove ICA artifact components with
//! one decomposition per subject over its concatenated epochs, then remove
//! the baseline mean from the whole epoch.  When `reuse_cached_cleaning` is
//! set the filter and ICA stages are skipped (input already carries them);
//! quality gates and baseline subtraction still run.
Dataset preprocess_dataset(const Dataset& dataset, const PreprocessConfig& config,
                           std::uint64_t seed, PreprocessReport* report = nullptr,
                           bool reuse_cached_cleaning = false, int jobs = 1);

}  // namespace engage
