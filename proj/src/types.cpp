#include "engage/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "engage/error.hpp"

namespace engage {

const char* to_string(Err code) {
  switch (code) {
    case Err::InvalidBand: return "InvalidBand";
    case Err::TooShort: return "TooShort";
    case Err::EmptyBaseline: return "EmptyBaseline";
    case Err::RankDeficient: return "RankDeficient";
    case Err::DegenerateData: return "DegenerateData";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::BandOutOfRange: return "BandOutOfRange";
    case Err::SingleClass: return "SingleClass";
    case Err::SingularCovariance: return "SingularCovariance";
    case Err::TooFewSamples: return "TooFewSamples";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::Empty: return "Empty";
    case Err::ConstantInput: return "ConstantInput";
    case Err::InvalidP: return "InvalidP";
    case Err::MissingRatings: return "MissingRatings";
    case Err::InvalidSpec: return "InvalidSpec";
    case Err::UnknownChannel: return "UnknownChannel";
    case Err::Io: return "Io";
  }
  return "Unknown";
}

ChannelLayout ChannelLayout::emotiv14() {
  return ChannelLayout{{"AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
                        "O2", "P8", "T8", "FC6", "F4", "F8", "AF4"}};
}

int ChannelLayout::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> ChannelLayout::indices_of(const std::vector<std::string>& wanted) const {
  std::vector<int> out;
  out.reserve(wanted.size());
  for (const auto& name : wanted) {
    int idx = index_of(name);
    if (idx < 0) raise(Err::UnknownChannel, "channel '" + name + "' not in layout");
    out.push_back(idx);
  }
  return out;
}

int window_samples(WindowMode mode) {
  switch (mode) {
    case WindowMode::F30: return 3667;
    case WindowMode::L30: return 3667;
    case WindowMode::L10: return 1280;
  }
  return 0;
}

bool window_from_start(WindowMode mode) { return mode == WindowMode::F30; }

const char* to_string(WindowMode mode) {
  switch (mode) {
    case WindowMode::F30: return "F30";
    case WindowMode::L30: return "L30";
    case WindowMode::L10: return "L10";
  }
  return "?";
}

WindowMode window_mode_from_string(const std::string& name) {
  if (name == "F30") return WindowMode::F30;
  if (name == "L30") return WindowMode::L30;
  if (name == "L10") return WindowMode::L10;
  raise(Err::InvalidSpec, "unknown window mode '" + name + "'");
}

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::string channel_count_msg(const char* field, long got, int want) {
  std::ostringstream os;
  os << field << ": channel count " << got << " does not match layout (" << want << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> validate_epoch(const Epoch& epoch, const ChannelLayout& layout) {
  std::vector<std::string> violations;
  if (layout.names.empty()) violations.push_back("layout: no channels");
  {
    std::set<std::string> seen(layout.names.begin(), layout.names.end());
    if (seen.size() != layout.names.size())
      violations.push_back("layout: duplicate channel names");
  }
  if (!(epoch.sample_rate_hz > 0.0))
    violations.push_back("sample_rate_hz: must be positive");
  if (epoch.stimulus.cols() == 0)
    violations.push_back("stimulus: empty window");
  if (epoch.stimulus.rows() != layout.size())
    violations.push_back(channel_count_msg("stimulus", epoch.stimulus.rows(), layout.size()));
  if (epoch.baseline.cols() > 0 && epoch.baseline.rows() != layout.size())
    violations.push_back(channel_count_msg("baseline", epoch.baseline.rows(), layout.size()));
  if (!all_finite(epoch.stimulus))
    violations.push_back("stimulus: contains non-finite samples");
  if (!all_finite(epoch.baseline))
    violations.push_back("baseline: contains non-finite samples");
  if (epoch.sample_rate_hz > 0.0) {
    long expected = std::lround(epoch.sample_rate_hz);  // one second of baseline
    if (std::labs(epoch.baseline.cols() - expected) > 1) {
      std::ostringstream os;
      os << "baseline: " << epoch.baseline.cols() << " samples, expected about "
         << expected << " (1 s at " << epoch.sample_rate_hz << " Hz)";
      violations.push_back(os.str());
    }
  }
  if (epoch.label.has_value() && *epoch.label != 0 && *epoch.label != 1)
    violations.push_back("label: must be 0 or 1 when present");
  return violations;
}

std::vector<std::string> validate_recording(const Recording& rec, const ChannelLayout& layout) {
  std::vector<std::string> violations;
  if (rec.samples.rows() != layout.size())
    violations.push_back(channel_count_msg("samples", rec.samples.rows(), layout.size()));
  if (!(rec.sample_rate_hz > 0.0))
    violations.push_back("sample_rate_hz: must be positive");
  if (!all_finite(rec.samples))
    violations.push_back("samples: contains non-finite values");
  long n = rec.samples.cols();
  for (size_t i = 0; i < rec.events.size(); ++i) {
    const auto& ev = rec.events[i];
    if (ev.onset_sample < 0 || ev.duration_samples <= 0 ||
        ev.onset_sample + ev.duration_samples > n) {
      std::ostringstream os;
      os << "events[" << i << "]: [" << ev.onset_sample << ", "
         << ev.onset_sample + ev.duration_samples << ") outside recording of " << n
         << " samples";
      violations.push_back(os.str());
    }
  }
  return violations;
}

Epoch extract_epoch(const Recording& rec, const StimulusEvent& event, int baseline_samples) {
  if (baseline_samples < 0)
    raise(Err::InvalidSpec, "baseline_samples must be non-negative");
  if (event.onset_sample - baseline_samples < 0)
    raise(Err::TooShort, "recording starts after the requested baseline window");
  if (event.onset_sample + event.duration_samples > rec.samples.cols())
    raise(Err::TooShort, "stimulus interval extends past the end of the recording");
  Epoch epoch;
  epoch.subject_id = rec.subject_id;
  epoch.ad_id = event.ad_id;
  epoch.id = rec.subject_id + "_" + event.ad_id;
  epoch.sample_rate_hz = rec.sample_rate_hz;
  epoch.baseline = rec.samples.middleCols(event.onset_sample - baseline_samples, baseline_samples);
  epoch.stimulus = rec.samples.middleCols(event.onset_sample, event.duration_samples);
  return epoch;
}

}  // namespace engage
