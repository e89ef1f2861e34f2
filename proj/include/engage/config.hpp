#pragma once

#include <cstdint>
#include <string>

#include "engage/cv.hpp"
#include "engage/features.hpp"
#include "engage/model.hpp"
#include "engage/preprocess.hpp"
#include "engage/synthgen.hpp"

namespace engage {

struct StatsConfig {
  std::string ratings_csv;
  double fdr_q = 0.05;
};

//! One experiment run: where the data lives, how every stage is configured,
//! and the base seed all stage seeds derive from.
struct RunConfig {
  std::string dataset;
  std::string output = "out";
  std::uint64_t base_seed = 42;
  PreprocessConfig preprocessing;
  FeatureConfig features;
  ModelConfig model;
  CvPlan eval;
  StatsConfig stats;
};

//! Strict JSON parsing: unknown keys, wrong types, and out-of-range values
//! raise Err::InvalidSpec naming the offending key.  Every field falls back
//! to its default when absent.
RunConfig parse_run_config(const std::string& json_text);
GeneratorSpec parse_generator_spec(const std::string& json_text);

//! Canonical serialization with every default materialized and keys in a
//! fixed order; equal configs serialize to equal bytes.
std::string serialize(const RunConfig& config);
std::string serialize(const GeneratorSpec& spec);

//! FNV-1a (64-bit) over arbitrary bytes, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

//! Fingerprint of the canonical serialization.
std::string config_fingerprint(const RunConfig& config);
std::string config_fingerprint(const GeneratorSpec& spec);

//! Fingerprint of the preprocessing block alone, used to decide whether a
//! dataset on disk already carries the requested cleaning.
std::string preprocess_fingerprint(const PreprocessConfig& config, std::uint64_t seed);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace engage
