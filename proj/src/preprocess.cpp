#include "engage/preprocess.hpp"

#include <map>
#include <sstream>

#include "engage/error.hpp"
#include "engage/log.hpp"
#include "engage/parallel.hpp"

namespace engage {

bool detect_noisy_epoch(const Epoch& epoch, const NoisyCriteria& criteria) {
  // Amplitude rules look at the stimulus window only; the 1 s baseline is
  // kept regardless so that baseline subtraction stays available.
  for (long ch = 0; ch < epoch.stimulus.rows(); ++ch) {
    const double p2p =
        epoch.stimulus.row(ch).maxCoeff() - epoch.stimulus.row(ch).minCoeff();
    if (p2p > criteria.max_peak_to_peak_uv || p2p < criteria.flatline_uv) return true;
  }
  return false;
}

Epoch baseline_subtract(const Epoch& epoch, bool shift_baseline) {
  if (epoch.baseline.cols() == 0)
    raise(Err::EmptyBaseline, "epoch '" + epoch.id + "' has no baseline window");
  Epoch out = epoch;
  const Eigen::VectorXd offset = epoch.baseline.rowwise().mean();
  out.stimulus.colwise() -= offset;
  if (shift_baseline) out.baseline.colwise() -= offset;
  return out;
}

Eigen::MatrixXd segment_window(const Epoch& epoch, WindowMode mode) {
  const int needed = window_samples(mode);
  const long available = epoch.stimulus.cols();
  if (available < needed) {
    std::ostringstream os;
    os << to_string(mode) << " needs " << needed << " stimulus samples, epoch '" << epoch.id
       << "' has " << available;
    raise(Err::TooShort, os.str());
  }
  return window_from_start(mode) ? epoch.stimulus.leftCols(needed)
                                 : epoch.stimulus.rightCols(needed);
}

namespace {

Eigen::MatrixXd concat_epoch(const Epoch& epoch) {
  Eigen::MatrixXd joined(epoch.stimulus.rows(), epoch.baseline.cols() + epoch.stimulus.cols());
  if (epoch.baseline.cols() > 0) joined.leftCols(epoch.baseline.cols()) = epoch.baseline;
  joined.rightCols(epoch.stimulus.cols()) = epoch.stimulus;
  return joined;
}

void split_epoch(const Eigen::MatrixXd& joined, Epoch& epoch) {
  const long b = epoch.baseline.cols();
  if (b > 0) epoch.baseline = joined.leftCols(b);
  epoch.stimulus = joined.rightCols(joined.cols() - b);
}

}  // namespace

Dataset preprocess_dataset(const Dataset& dataset, const PreprocessConfig& config,
                           std::uint64_t seed, PreprocessReport* report,
                           bool reuse_cached_cleaning, int jobs) {
  Dataset out;
  out.layout = dataset.layout;
  out.config_fingerprint = dataset.config_fingerprint;

  PreprocessReport local;
  PreprocessReport& rep = report != nullptr ? *report : local;

  // Quality gate first; rejected epochs never reach the filters.
  std::vector<Epoch> kept;
  for (const auto& epoch : dataset.epochs) {
    if (detect_noisy_epoch(epoch, config.noisy)) {
      rep.dropped_noisy_epochs.push_back(epoch.id);
      log_info("dropping noisy epoch " + epoch.id);
    } else {
      kept.push_back(epoch);
    }
  }

  if (!reuse_cached_cleaning && config.bandpass_enabled) {
    parallel_for(kept.size(), jobs, [&](size_t i) {
      Epoch& epoch = kept[i];
      const Eigen::MatrixXd filtered =
          bandpass_filter(concat_epoch(epoch), epoch.sample_rate_hz, config.bandpass);
      split_epoch(filtered, epoch);
    });
  }

  if (!reuse_cached_cleaning) {
    // One decomposition per subject over its concatenated epochs.
    std::map<std::string, std::vector<size_t>> by_subject;
    for (size_t i = 0; i < kept.size(); ++i) by_subject[kept[i].subject_id].push_back(i);

    ArtifactCriteria criteria;
    criteria.kurtosis_z = config.kurtosis_z;
    criteria.frontal_corr = config.frontal_corr;
    criteria.frontal_channels = out.layout.indices_of(config.frontal_channels);

    std::vector<const std::vector<size_t>*> groups;
    std::vector<std::string> subjects;
    for (const auto& [subject, indices] : by_subject) {
      subjects.push_back(subject);
      groups.push_back(&indices);
    }
    rep.ica_runs.resize(groups.size());

    parallel_for(groups.size(), jobs, [&](size_t gi) {
      const std::vector<size_t>& indices = *groups[gi];
      long total_cols = 0;
      for (size_t i : indices)
        total_cols += kept[i].baseline.cols() + kept[i].stimulus.cols();
      Eigen::MatrixXd joined(out.layout.size(), total_cols);
      long cursor = 0;
      for (size_t i : indices) {
        const Eigen::MatrixXd one = concat_epoch(kept[i]);
        joined.middleCols(cursor, one.cols()) = one;
        cursor += one.cols();
      }

      const IcaConfig ica_cfg{config.ica.k, config.ica.max_iter, config.ica.tol,
                              config.ica.seed ^ seed};
      const IcaModel model = fit_ica(joined, ica_cfg);
      const CleanResult clean = reject_artifact_components(model, joined, criteria);

      cursor = 0;
      for (size_t i : indices) {
        const long w = kept[i].baseline.cols() + kept[i].stimulus.cols();
        split_epoch(clean.cleaned.middleCols(cursor, w), kept[i]);
        cursor += w;
      }

      SubjectIcaOutcome& outcome = rep.ica_runs[gi];
      outcome.subject_id = subjects[gi];
      outcome.rejected_components = clean.rejected;
      outcome.converged = model.converged;
      outcome.iterations = model.iterations;
      outcome.all_rejected = clean.all_rejected;
    });
  }

  for (auto& epoch : kept) {
    // Shift the whole epoch so repeated cleaning passes are no-ops.
    epoch = baseline_subtract(epoch, /*shift_baseline=*/true);
  }

  out.epochs = std::move(kept);
  out.cleaned = true;
  return out;
}

}  // namespace engage
