#include "engage/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "engage/error.hpp"

namespace engage {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad_key(const std::string& context, const std::string& detail) {
  raise(Err::InvalidSpec, "config key '" + context + "': " + detail);
}

//! Wraps one JSON object and tracks which keys were consumed, so leftovers
//! (usually typos) are reported instead of silently ignored.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string context) : context_(std::move(context)) {
    if (!node.is_object()) bad_key(context_, "expected an object");
    node_ = &node;
  }

  template <typename T>
  void read(const char* key, T& into) {
    const auto it = node_->find(key);
    if (it == node_->end()) return;
    seen_.insert(key);
    try {
      into = it->get<T>();
    } catch (const json::exception&) {
      bad_key(context_ + "." + key, "wrong type");
    }
  }

  bool has(const char* key) const { return node_->find(key) != node_->end(); }

  const json* child(const char* key) {
    const auto it = node_->find(key);
    if (it == node_->end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [key, value] : node_->items())
      if (seen_.find(key) == seen_.end()) bad_key(context_ + "." + key, "unknown key");
  }

 private:
  const json* node_ = nullptr;
  std::string context_;
  std::set<std::string> seen_;
};

json parse_json(const std::string& text) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) raise(Err::InvalidSpec, "config is not valid JSON");
  return parsed;
}

void read_preprocessing(const json& node, PreprocessConfig& config) {
  ObjectReader block(node, "preprocessing");
  if (const json* bp = block.child("bandpass")) {
    ObjectReader reader(*bp, "preprocessing.bandpass");
    reader.read("enabled", config.bandpass_enabled);
    reader.read("low_hz", config.bandpass.low_hz);
    reader.read("high_hz", config.bandpass.high_hz);
    reader.read("order", config.bandpass.order);
    reader.read("zero_phase", config.bandpass.zero_phase);
    reader.finish();
  }
  if (const json* ica = block.child("ica")) {
    ObjectReader reader(*ica, "preprocessing.ica");
    reader.read("k", config.ica.k);
    reader.read("seed", config.ica.seed);
    reader.read("max_iter", config.ica.max_iter);
    reader.read("tol", config.ica.tol);
    reader.read("kurtosis_z_threshold", config.kurtosis_z);
    reader.read("frontal_corr_threshold", config.frontal_corr);
    reader.read("frontal_channels", config.frontal_channels);
    reader.finish();
  }
  if (const json* noisy = block.child("noisy")) {
    ObjectReader reader(*noisy, "preprocessing.noisy");
    reader.read("amp_threshold_uv", config.noisy.max_peak_to_peak_uv);
    reader.read("flatline_threshold_uv", config.noisy.flatline_uv);
    reader.finish();
  }
  block.finish();
}

void read_features(const json& node, FeatureConfig& config) {
  ObjectReader block(node, "features");
  block.read("features", config.kind);
  if (config.kind != "time" && config.kind != "bandpower")
    bad_key("features.features", "expected \"time\" or \"bandpower\", got \"" + config.kind + "\"");
  if (const json* pca = block.child("pca")) {
    ObjectReader reader(*pca, "features.pca");
    reader.read("k", config.pca.k);
    reader.read("explained_fraction", config.pca.explained_fraction);
    reader.finish();
  }
  if (const json* welch = block.child("welch")) {
    ObjectReader reader(*welch, "features.welch");
    reader.read("segment_seconds", config.welch.segment_seconds);
    reader.read("overlap", config.welch.overlap);
    reader.finish();
  }
  block.finish();
}

void read_model(const json& node, ModelConfig& config) {
  ObjectReader block(node, "model");
  std::string classifier = "rsvm";
  block.read("classifier", classifier);
  config.kind = classifier_from_string(classifier);
  block.read("lda_shrinkage", config.lda.shrinkage);
  double grid_min = 1e-3;
  double grid_max = 1e3;
  int grid_points = 7;
  if (const json* grid = block.child("grid")) {
    ObjectReader reader(*grid, "model.grid");
    reader.read("min", grid_min);
    reader.read("max", grid_max);
    reader.read("points_per_axis", grid_points);
    reader.read("inner_folds", config.grid.inner_folds);
    reader.finish();
  }
  config.grid.c_values = log_spaced(grid_min, grid_max, grid_points);
  config.grid.gamma_values = config.grid.c_values;
  if (const json* svm = block.child("svm")) {
    ObjectReader reader(*svm, "model.svm");
    reader.read("tol", config.svm_tol);
    reader.read("max_iter", config.svm_max_iter);
    reader.finish();
  }
  block.finish();
}

void read_eval(const json& node, CvPlan& plan) {
  ObjectReader block(node, "eval");
  block.read("folds", plan.folds);
  block.read("repetitions", plan.repetitions);
  block.read("group_by_ad", plan.group_by_ad);
  block.read("group_by_subject", plan.group_by_subject);
  block.read("permute_labels", plan.permute_labels);
  block.finish();
  if (plan.folds < 2) bad_key("eval.folds", "must be at least 2");
  if (plan.repetitions < 1) bad_key("eval.repetitions", "must be at least 1");
}

void read_stats(const json& node, StatsConfig& config) {
  ObjectReader block(node, "stats");
  block.read("ratings", config.ratings_csv);
  block.read("fdr_q", config.fdr_q);
  block.finish();
}

std::string classifier_config_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Lda: return "lda";
    case ClassifierKind::LinearSvm: return "lsvm";
    case ClassifierKind::RbfSvm: return "rsvm";
  }
  return "rsvm";
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  const json parsed = parse_json(json_text);
  RunConfig config;
  ObjectReader root(parsed, "(root)");
  root.read("dataset", config.dataset);
  root.read("output", config.output);
  root.read("base_seed", config.base_seed);
  if (const json* node = root.child("preprocessing")) read_preprocessing(*node, config.preprocessing);
  if (const json* node = root.child("features")) read_features(*node, config.features);
  if (const json* node = root.child("model")) read_model(*node, config.model);
  if (const json* node = root.child("eval")) read_eval(*node, config.eval);
  if (const json* node = root.child("stats")) read_stats(*node, config.stats);
  root.finish();
  config.eval.base_seed = config.base_seed;
  return config;
}

GeneratorSpec parse_generator_spec(const std::string& json_text) {
  const json parsed = parse_json(json_text);
  GeneratorSpec spec;
  ObjectReader root(parsed, "(root)");
  root.read("n_ads", spec.n_ads);
  root.read("n_subjects", spec.n_subjects);
  root.read("sample_rate_hz", spec.sample_rate_hz);
  root.read("epoch_seconds", spec.epoch_seconds);
  root.read("label_balance", spec.label_balance);
  root.read("signal_snr_db", spec.signal_snr_db);
  root.read("snr_decay_db_per_30s", spec.snr_decay_db_per_30s);
  root.read("artifact_rate_per_min", spec.artifact_rate_per_min);
  root.read("drop_rate", spec.drop_rate);
  root.read("amp_jitter_db", spec.amp_jitter_db);
  root.read("pink_noise_uv", spec.pink_noise_uv);
  root.read("white_noise_uv", spec.white_noise_uv);
  root.read("n_annotators", spec.n_annotators);
  root.read("seed", spec.seed);
  root.finish();
  validate_generator_spec(spec);
  return spec;
}

std::string serialize(const RunConfig& config) {
  json out;
  out["dataset"] = config.dataset;
  out["output"] = config.output;
  out["base_seed"] = config.base_seed;
  out["preprocessing"] = {
      {"bandpass",
       {{"enabled", config.preprocessing.bandpass_enabled},
        {"low_hz", config.preprocessing.bandpass.low_hz},
        {"high_hz", config.preprocessing.bandpass.high_hz},
        {"order", config.preprocessing.bandpass.order},
        {"zero_phase", config.preprocessing.bandpass.zero_phase}}},
      {"ica",
       {{"k", config.preprocessing.ica.k},
        {"seed", config.preprocessing.ica.seed},
        {"max_iter", config.preprocessing.ica.max_iter},
        {"tol", config.preprocessing.ica.tol},
        {"kurtosis_z_threshold", config.preprocessing.kurtosis_z},
        {"frontal_corr_threshold", config.preprocessing.frontal_corr},
        {"frontal_channels", config.preprocessing.frontal_channels}}},
      {"noisy",
       {{"amp_threshold_uv", config.preprocessing.noisy.max_peak_to_peak_uv},
        {"flatline_threshold_uv", config.preprocessing.noisy.flatline_uv}}}};
  out["features"] = {{"features", config.features.kind},
                     {"pca",
                      {{"k", config.features.pca.k},
                       {"explained_fraction", config.features.pca.explained_fraction}}},
                     {"welch",
                      {{"segment_seconds", config.features.welch.segment_seconds},
                       {"overlap", config.features.welch.overlap}}}};
  out["model"] = {{"classifier", classifier_config_name(config.model.kind)},
                  {"grid",
                   {{"min", config.model.grid.c_values.front()},
                    {"max", config.model.grid.c_values.back()},
                    {"points_per_axis", static_cast<int>(config.model.grid.c_values.size())},
                    {"inner_folds", config.model.grid.inner_folds}}},
                  {"lda_shrinkage", config.model.lda.shrinkage},
                  {"svm", {{"tol", config.model.svm_tol}, {"max_iter", config.model.svm_max_iter}}}};
  out["eval"] = {{"folds", config.eval.folds},
                 {"repetitions", config.eval.repetitions},
                 {"group_by_ad", config.eval.group_by_ad},
                 {"group_by_subject", config.eval.group_by_subject},
                 {"permute_labels", config.eval.permute_labels}};
  out["stats"] = {{"ratings", config.stats.ratings_csv}, {"fdr_q", config.stats.fdr_q}};
  return out.dump(2) + "\n";
}

std::string serialize(const GeneratorSpec& spec) {
  json out;
  out["n_ads"] = spec.n_ads;
  out["n_subjects"] = spec.n_subjects;
  out["sample_rate_hz"] = spec.sample_rate_hz;
  out["epoch_seconds"] = spec.epoch_seconds;
  out["label_balance"] = spec.label_balance;
  out["signal_snr_db"] = spec.signal_snr_db;
  out["snr_decay_db_per_30s"] = spec.snr_decay_db_per_30s;
  out["artifact_rate_per_min"] = spec.artifact_rate_per_min;
  out["drop_rate"] = spec.drop_rate;
  out["amp_jitter_db"] = spec.amp_jitter_db;
  out["pink_noise_uv"] = spec.pink_noise_uv;
  out["white_noise_uv"] = spec.white_noise_uv;
  out["n_annotators"] = spec.n_annotators;
  out["seed"] = spec.seed;
  return out.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string config_fingerprint(const RunConfig& config) { return fnv1a_hex(serialize(config)); }

std::string config_fingerprint(const GeneratorSpec& spec) { return fnv1a_hex(serialize(spec)); }

std::string preprocess_fingerprint(const PreprocessConfig& config, std::uint64_t seed) {
  RunConfig shell;
  shell.preprocessing = config;
  shell.base_seed = seed;
  json full = json::parse(serialize(shell));
  json reduced;
  reduced["preprocessing"] = full["preprocessing"];
  reduced["base_seed"] = full["base_seed"];
  return fnv1a_hex(reduced.dump());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::Io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out.flush()) raise(Err::Io, "failed writing '" + path + "'");
}

}  // namespace engage
