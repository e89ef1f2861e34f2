// Command-line runner: generate | preprocess | evaluate | stats.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O failure,
// 4 pipeline failure (failing stage named on stderr).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "engage/config.hpp"
#include "engage/cv.hpp"
#include "engage/epoch_io.hpp"
#include "engage/error.hpp"
#include "engage/log.hpp"
#include "engage/stats.hpp"
#include "engage/synthgen.hpp"

namespace {

using engage::Err;
using engage::Error;
using json = nlohmann::ordered_json;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file");
  cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", args.seed, "base seed (overrides the config)");
  cmd->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Err::Io:
      return 3;
    case Err::InvalidSpec:
    case Err::InvalidBand:
    case Err::InvalidP:
    case Err::UnknownChannel:
      return 2;
    default:
      return 4;
  }
}

//! Runs one named stage; failures are reported with the stage attached and
//! converted to the documented exit codes.
template <typename Fn>
int run_stage(const char* stage, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: stage '" << stage << "' failed: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: stage '" << stage << "' failed: " << e.what() << "\n";
    return 4;
  }
}

engage::RunConfig load_run_config(const CommonArgs& args) {
  if (args.config_path.empty()) engage::raise(Err::InvalidSpec, "--config is required");
  engage::RunConfig config = engage::parse_run_config(engage::read_text_file(args.config_path));
  if (args.seed.has_value()) {
    config.base_seed = *args.seed;
    config.eval.base_seed = *args.seed;
  }
  if (!args.out_dir.empty()) config.output = args.out_dir;
  return config;
}

//! Cleans the dataset unless it already carries this exact cleaning pass.
engage::Dataset ensure_cleaned(const engage::Dataset& dataset, const engage::RunConfig& config,
                               engage::PreprocessReport* report, int jobs) {
  const std::string wanted =
      engage::preprocess_fingerprint(config.preprocessing, config.base_seed);
  const bool reuse = dataset.cleaned && dataset.preprocess_fingerprint == wanted;
  if (reuse) {
    engage::log_info("dataset already cleaned with this configuration; skipping filter and ICA");
  } else if (dataset.cleaned) {
    engage::log_warn("dataset was cleaned with a different configuration; re-cleaning");
  }
  engage::Dataset cleaned =
      engage::preprocess_dataset(dataset, config.preprocessing, config.base_seed, report, reuse, jobs);
  cleaned.config_fingerprint = engage::config_fingerprint(config);
  cleaned.preprocess_fingerprint = wanted;
  return cleaned;
}

int cmd_generate(const CommonArgs& args) {
  engage::GeneratorSpec spec;
  int rc = run_stage("parse-config", [&] {
    if (!args.config_path.empty())
      spec = engage::parse_generator_spec(engage::read_text_file(args.config_path));
    if (args.seed.has_value()) spec.seed = *args.seed;
    engage::validate_generator_spec(spec);
  });
  if (rc != 0) return rc;

  const std::string out = args.out_dir.empty() ? "dataset" : args.out_dir;
  return run_stage("generate", [&] {
    engage::GeneratedData data = engage::generate_dataset(spec);
    data.dataset.config_fingerprint = engage::config_fingerprint(spec);
    engage::save_dataset(out, data.dataset);
    engage::write_ratings_csv(out + "/ratings.csv", data.ratings);

    int positive = 0;
    for (const auto& [ad, label] : data.ad_labels) positive += label;
    std::cout << "dataset: " << out << "\n"
              << "epochs: " << data.dataset.epochs.size() << "\n"
              << "ads: " << data.ad_labels.size() << " (" << positive << " high, "
              << data.ad_labels.size() - positive << " low)\n"
              << "config_fingerprint: " << data.dataset.config_fingerprint << "\n";
  });
}

int cmd_preprocess(const CommonArgs& args) {
  engage::RunConfig config;
  int rc = run_stage("parse-config", [&] {
    config = load_run_config(args);
    if (config.dataset.empty()) engage::raise(Err::InvalidSpec, "config needs a 'dataset' path");
  });
  if (rc != 0) return rc;

  engage::Dataset dataset;
  rc = run_stage("load-dataset", [&] { dataset = engage::load_dataset(config.dataset); });
  if (rc != 0) return rc;

  engage::PreprocessReport report;
  engage::Dataset cleaned;
  rc = run_stage("preprocess", [&] { cleaned = ensure_cleaned(dataset, config, &report, args.jobs); });
  if (rc != 0) return rc;

  return run_stage("write-output", [&] {
    engage::save_dataset(config.output, cleaned);

    json log;
    log["config_fingerprint"] = cleaned.config_fingerprint;
    log["preprocess_fingerprint"] = cleaned.preprocess_fingerprint;
    log["dropped_noisy_epochs"] = report.dropped_noisy_epochs;
    log["ica"] = json::array();
    for (const auto& run : report.ica_runs) {
      log["ica"].push_back({{"subject_id", run.subject_id},
                            {"rejected_components", run.rejected_components},
                            {"converged", run.converged},
                            {"iterations", run.iterations},
                            {"all_rejected", run.all_rejected}});
    }
    engage::write_text_file(config.output + "/preprocess_log.json", log.dump(2) + "\n");

    std::cout << "cleaned dataset: " << config.output << "\n"
              << "epochs kept: " << cleaned.epochs.size() << " of " << dataset.epochs.size()
              << "\n"
              << "noisy epochs dropped: " << report.dropped_noisy_epochs.size() << "\n";
    for (const auto& run : report.ica_runs)
      std::cout << "subject " << run.subject_id << ": rejected "
                << run.rejected_components.size() << " component(s)\n";
  });
}

int cmd_evaluate(const CommonArgs& args) {
  engage::RunConfig config;
  int rc = run_stage("parse-config", [&] {
    config = load_run_config(args);
    if (config.dataset.empty()) engage::raise(Err::InvalidSpec, "config needs a 'dataset' path");
  });
  if (rc != 0) return rc;

  engage::Dataset dataset;
  rc = run_stage("load-dataset", [&] { dataset = engage::load_dataset(config.dataset); });
  if (rc != 0) return rc;

  engage::Dataset cleaned;
  rc = run_stage("preprocess", [&] { cleaned = ensure_cleaned(dataset, config, nullptr, args.jobs); });
  if (rc != 0) return rc;

  std::vector<engage::CellResult> cells;
  rc = run_stage("evaluate", [&] {
    cells = engage::experiment_matrix(cleaned, config.features, config.model, config.eval,
                                      args.jobs);
  });
  if (rc != 0) return rc;

  return run_stage("write-results", [&] {
    const std::string fingerprint = engage::config_fingerprint(config);
    std::filesystem::create_directories(config.output);
    engage::write_text_file(config.output + "/results.json",
                            engage::report_json(cells, fingerprint));
    const std::string table = engage::render_table(cells);
    engage::write_text_file(config.output + "/results_table.txt", table);
    std::cout << table;
  });
}

int cmd_stats(const CommonArgs& args) {
  engage::RunConfig config;
  int rc = run_stage("parse-config", [&] {
    config = load_run_config(args);
    if (config.stats.ratings_csv.empty())
      engage::raise(Err::InvalidSpec, "config needs stats.ratings with a ratings CSV path");
  });
  if (rc != 0) return rc;

  engage::RatingTable table;
  rc = run_stage("read-ratings", [&] { table = engage::read_ratings_csv(config.stats.ratings_csv); });
  if (rc != 0) return rc;

  return run_stage("stats", [&] {
    const engage::LabelingModel labels = engage::aggregate_labels(table);
    const engage::RatingHistogram hist = engage::rating_histogram(table);

    json report;
    report["config_fingerprint"] = engage::config_fingerprint(config);
    report["n_records"] = table.records.size();
    report["n_ads"] = labels.ad_means.size();
    report["grand_mean"] = labels.grand_mean;
    report["labels"] = json::object();
    for (const auto& [ad, label] : labels.labels) report["labels"][ad] = label;
    report["ad_means"] = json::object();
    for (const auto& [ad, mean] : labels.ad_means) report["ad_means"][ad] = mean;
    report["histogram"] = {{"counts", hist.counts}, {"mu", hist.mu}, {"sigma", hist.sigma}};

    // The correlation block needs valence and arousal; files carrying only
    // engagement still get the histogram and labels.
    bool has_all = false;
    for (const auto& rec : table.records)
      if (rec.valence.has_value() && rec.arousal.has_value()) {
        has_all = true;
        break;
      }
    if (has_all) {
      const engage::CorrelationMatrix corr =
          engage::correlation_matrix(table, config.stats.fdr_q);
      report["correlations"] = {{"attributes", corr.attributes},
                                {"n_ads", corr.n_ads},
                                {"fdr_q", config.stats.fdr_q},
                                {"r", corr.r},
                                {"p", corr.p},
                                {"significant", corr.significant}};
    } else {
      engage::log_info("valence/arousal absent; correlation matrix omitted");
    }

    std::filesystem::create_directories(config.output);
    engage::write_text_file(config.output + "/stats_report.json", report.dump(2) + "\n");

    std::cout << "ads: " << labels.ad_means.size() << ", grand mean " << labels.grand_mean
              << "\n"
              << "histogram mu " << hist.mu << ", sigma " << hist.sigma << "\n";
    if (has_all)
      std::cout << "correlation matrix written (" << report["correlations"]["n_ads"]
                << " ads)\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG engagement estimation over advertisement epochs"};
  app.require_subcommand(1);

  CommonArgs generate_args, preprocess_args, evaluate_args, stats_args;
  CLI::App* generate = app.add_subcommand("generate", "synthesize a labeled dataset");
  add_common(generate, generate_args);
  CLI::App* preprocess = app.add_subcommand("preprocess", "clean a dataset on disk");
  add_common(preprocess, preprocess_args);
  CLI::App* evaluate = app.add_subcommand("evaluate", "run the classifier/window matrix");
  add_common(evaluate, evaluate_args);
  CLI::App* stats = app.add_subcommand("stats", "annotation statistics report");
  add_common(stats, stats_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (generate->parsed()) return cmd_generate(generate_args);
  if (preprocess->parsed()) return cmd_preprocess(preprocess_args);
  if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
  if (stats->parsed()) return cmd_stats(stats_args);
  return 2;
}
