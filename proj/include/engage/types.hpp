#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace engage {

//! Ordered electrode names.  Rows of every sample matrix follow this order.
struct ChannelLayout {
  std::vector<std::string> names;

  //! 14-channel consumer headset montage used throughout this project.
  static ChannelLayout emotiv14();

  int size() const { return static_cast<int>(names.size()); }

  //! Index of `name`, or -1 when absent.
  int index_of(const std::string& name) const;

  //! Indices for each name; throws Err::UnknownChannel on a miss.
  std::vector<int> indices_of(const std::vector<std::string>& wanted) const;
};

//! One stimulus presentation: a pre-stimulus baseline directly followed by
//! the stimulus interval.  Matrices are channels x samples, microvolts.
struct Epoch {
  std::string id;
  std::string subject_id;
  std::string ad_id;
  double sample_rate_hz = 128.0;
  std::optional<int> label;  // 1 = engaging, 0 = not, nullopt = unlabeled
  Eigen::MatrixXd baseline;  // channels x b_samples, t < 0
  Eigen::MatrixXd stimulus;  // channels x s_samples, t >= 0

  int channels() const { return static_cast<int>(stimulus.rows()); }
  int baseline_samples() const { return static_cast<int>(baseline.cols()); }
  int stimulus_samples() const { return static_cast<int>(stimulus.cols()); }
};

//! Continuous multi-channel session with stimulus onset markers.
struct StimulusEvent {
  std::string ad_id;
  long onset_sample = 0;      // index into Recording::samples
  long duration_samples = 0;  // stimulus length from the onset
};

struct Recording {
  std::string subject_id;
  double sample_rate_hz = 128.0;
  Eigen::MatrixXd samples;  // channels x n
  std::vector<StimulusEvent> events;
};

//! Temporal analysis windows over the stimulus interval.  Sample counts are
//! fixed by the 128 Hz acquisition design: the 30 s windows keep 3667
//! samples, the 10 s window keeps 1280.
enum class WindowMode { F30, L30, L10 };

//! Number of stimulus samples the mode keeps.
int window_samples(WindowMode mode);

//! True when the window is anchored at stimulus onset (F30); false when it
//! is anchored at the end of the stimulus (L30, L10).
bool window_from_start(WindowMode mode);

const char* to_string(WindowMode mode);
WindowMode window_mode_from_string(const std::string& name);

//! Collected violations, one human-readable string per broken rule.
//! Empty result means the epoch is structurally sound: matching channel
//! counts, finite samples, positive sample rate, a baseline consistent with
//! one second of data, and a label restricted to {0, 1} when present.
std::vector<std::string> validate_epoch(const Epoch& epoch, const ChannelLayout& layout);

std::vector<std::string> validate_recording(const Recording& rec, const ChannelLayout& layout);

//! Cuts one epoch out of a recording: `baseline_samples` samples directly
//! before the event onset plus the event's stimulus interval.
Epoch extract_epoch(const Recording& rec, const StimulusEvent& event, int baseline_samples);

//! Epochs plus the layout they share; order follows the dataset manifest.
struct Dataset {
  ChannelLayout layout;
  std::vector<Epoch> epochs;
  std::string config_fingerprint;       // fingerprint of the producing config
  std::string preprocess_fingerprint;   // set once a cleaning pass ran
  bool cleaned = false;
};

}  // namespace engage
