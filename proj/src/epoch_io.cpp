#include "engage/epoch_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "engage/error.hpp"
#include "engage/log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace engage {

std::string format_sample(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

double parse_double(std::string_view text, const std::string& path) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    raise(Err::Io, path + ": bad numeric field '" + std::string(text) + "'");
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_file(const std::string& path) {
  json parsed = json::parse(read_file(path), nullptr, false);
  if (parsed.is_discarded()) raise(Err::Io, path + ": invalid JSON");
  return parsed;
}

}  // namespace

void write_epoch_csv(const std::string& path, const Epoch& epoch, const ChannelLayout& layout) {
  if (epoch.stimulus.rows() != layout.size() ||
      (epoch.baseline.cols() > 0 && epoch.baseline.rows() != layout.size()))
    raise(Err::Io, path + ": epoch channel count does not match layout");
  std::ofstream out = open_out(path);
  out << "t";
  for (const auto& name : layout.names) out << "," << name;
  out << "\n";
  const double fs = epoch.sample_rate_hz;
  const long b = epoch.baseline.cols();
  auto write_row = [&](double t, const Eigen::MatrixXd& block, long col) {
    out << format_sample(t);
    for (long ch = 0; ch < block.rows(); ++ch) out << "," << format_sample(block(ch, col));
    out << "\n";
  };
  for (long i = 0; i < b; ++i) write_row(static_cast<double>(i - b) / fs, epoch.baseline, i);
  for (long i = 0; i < epoch.stimulus.cols(); ++i)
    write_row(static_cast<double>(i) / fs, epoch.stimulus, i);
  if (!out) raise(Err::Io, path + ": write failed");
}

Epoch read_epoch_csv(const std::string& path, const ChannelLayout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) raise(Err::Io, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::string field;
    std::istringstream hs(line);
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  if (header.empty() || header[0] != "t")
    raise(Err::Io, path + ": first column must be 't'");
  if (static_cast<int>(header.size()) - 1 != layout.size())
    raise(Err::Io, path + ": header has " + std::to_string(header.size() - 1) +
                       " channels, layout expects " + std::to_string(layout.size()));
  for (int c = 0; c < layout.size(); ++c)
    if (header[c + 1] != layout.names[c])
      raise(Err::Io, path + ": channel order mismatch at column " + std::to_string(c + 1));

  const size_t cols = header.size();
  std::vector<double> baseline_flat, stimulus_flat;  // row-major per sample
  long baseline_rows = 0, stimulus_rows = 0;
  std::vector<double> row(cols);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t start = 0, field_idx = 0;
    while (field_idx < cols) {
      size_t comma = line.find(',', start);
      size_t end = comma == std::string::npos ? line.size() : comma;
      row[field_idx] = parse_double(std::string_view(line).substr(start, end - start), path);
      ++field_idx;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (field_idx != cols) raise(Err::Io, path + ": row with wrong field count");
    auto& flat = row[0] < 0.0 ? baseline_flat : stimulus_flat;
    auto& nrows = row[0] < 0.0 ? baseline_rows : stimulus_rows;
    if (row[0] < 0.0 && stimulus_rows > 0)
      raise(Err::Io, path + ": baseline row after stimulus rows");
    flat.insert(flat.end(), row.begin() + 1, row.end());
    ++nrows;
  }

  Epoch epoch;
  epoch.id = fs::path(path).stem().string();
  const int nch = layout.size();
  epoch.baseline.resize(nch, baseline_rows);
  for (long i = 0; i < baseline_rows; ++i)
    for (int ch = 0; ch < nch; ++ch) epoch.baseline(ch, i) = baseline_flat[i * nch + ch];
  epoch.stimulus.resize(nch, stimulus_rows);
  for (long i = 0; i < stimulus_rows; ++i)
    for (int ch = 0; ch < nch; ++ch) epoch.stimulus(ch, i) = stimulus_flat[i * nch + ch];
  return epoch;
}

void write_epoch_meta(const std::string& path, const Epoch& epoch) {
  json meta;
  meta["subject_id"] = epoch.subject_id;
  meta["ad_id"] = epoch.ad_id;
  meta["sample_rate_hz"] = epoch.sample_rate_hz;
  meta["label"] = epoch.label.has_value() ? json(*epoch.label) : json(nullptr);
  std::ofstream out = open_out(path);
  out << meta.dump(2) << "\n";
  if (!out) raise(Err::Io, path + ": write failed");
}

void read_epoch_meta(const std::string& path, Epoch& epoch) {
  json meta = parse_json_file(path);
  if (!meta.contains("subject_id") || !meta.contains("ad_id") || !meta.contains("sample_rate_hz"))
    raise(Err::Io, path + ": missing required meta fields");
  epoch.subject_id = meta["subject_id"].get<std::string>();
  epoch.ad_id = meta["ad_id"].get<std::string>();
  epoch.sample_rate_hz = meta["sample_rate_hz"].get<double>();
  epoch.label.reset();
  if (meta.contains("label") && !meta["label"].is_null()) {
    int label = meta["label"].get<int>();
    if (label != 0 && label != 1) raise(Err::Io, path + ": label must be 0, 1, or null");
    epoch.label = label;
  }
}

void write_manifest(const std::string& path, const Dataset& dataset) {
  json manifest;
  manifest["channels"] = dataset.layout.names;
  json ids = json::array();
  for (const auto& epoch : dataset.epochs) ids.push_back(epoch.id);
  manifest["epochs"] = ids;
  manifest["config_fingerprint"] = dataset.config_fingerprint;
  if (dataset.cleaned) {
    manifest["preprocess"] = {{"cleaned", true},
                              {"fingerprint", dataset.preprocess_fingerprint}};
  }
  std::ofstream out = open_out(path);
  out << manifest.dump(2) << "\n";
  if (!out) raise(Err::Io, path + ": write failed");
}

void save_dataset(const std::string& dir, const Dataset& dataset) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(Err::Io, "cannot create directory '" + dir + "': " + ec.message());
  write_manifest((fs::path(dir) / "manifest.json").string(), dataset);
  for (const auto& epoch : dataset.epochs) {
    const std::string stem = (fs::path(dir) / epoch.id).string();
    write_epoch_csv(stem + ".csv", epoch, dataset.layout);
    write_epoch_meta(stem + ".meta.json", epoch);
  }
  log_info("saved " + std::to_string(dataset.epochs.size()) + " epochs to " + dir);
}

Dataset load_dataset(const std::string& dir) {
  json manifest = parse_json_file((fs::path(dir) / "manifest.json").string());
  if (!manifest.contains("channels") || !manifest.contains("epochs"))
    raise(Err::Io, dir + "/manifest.json: missing channels or epochs");
  Dataset dataset;
  dataset.layout.names = manifest["channels"].get<std::vector<std::string>>();
  dataset.config_fingerprint = manifest.value("config_fingerprint", std::string());
  if (manifest.contains("preprocess")) {
    dataset.cleaned = manifest["preprocess"].value("cleaned", false);
    dataset.preprocess_fingerprint = manifest["preprocess"].value("fingerprint", std::string());
  }
  for (const auto& id : manifest["epochs"]) {
    const std::string stem = (fs::path(dir) / id.get<std::string>()).string();
    Epoch epoch = read_epoch_csv(stem + ".csv", dataset.layout);
    read_epoch_meta(stem + ".meta.json", epoch);
    epoch.id = id.get<std::string>();
    dataset.epochs.push_back(std::move(epoch));
  }
  log_info("loaded " + std::to_string(dataset.epochs.size()) + " epochs from " + dir);
  return dataset;
}

}  // namespace engage
