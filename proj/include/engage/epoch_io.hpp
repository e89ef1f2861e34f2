#pragma once

#include <string>

#include "engage/types.hpp"

namespace engage {

//! On-disk dataset layout, all files in one directory:
//!   manifest.json        ordered epoch ids, channel names, config fingerprint
//!   <id>.csv             header `t,<ch>,...`; baseline rows have t < 0
//!   <id>.meta.json       subject_id, ad_id, sample_rate_hz, label (0/1/null)
//!   ratings.csv          optional annotation table (see stats.hpp)
//!
//! Sample values are written with enough decimal digits to round-trip
//! bit-exactly.  All failures raise Err::Io.

void write_epoch_csv(const std::string& path, const Epoch& epoch, const ChannelLayout& layout);
Epoch read_epoch_csv(const std::string& path, const ChannelLayout& layout);

void write_epoch_meta(const std::string& path, const Epoch& epoch);
//! Fills subject/ad/rate/label fields of an existing epoch.
void read_epoch_meta(const std::string& path, Epoch& epoch);

void write_manifest(const std::string& path, const Dataset& dataset);

//! Writes manifest, epoch CSVs, and meta files into `dir` (created if needed).
void save_dataset(const std::string& dir, const Dataset& dataset);

//! Reads the manifest plus every listed epoch.
Dataset load_dataset(const std::string& dir);

//! Formats one double with round-trip precision (shared by writers).
std::string format_sample(double value);

}  // namespace engage
