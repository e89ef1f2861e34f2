#include "engage/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "engage/error.hpp"

namespace engage {

namespace {

//! Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

//! Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double population_std(const std::vector<double>& values, double mean) {
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return values.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(values.size()));
}

//! Per-ad means of one optional attribute; ads with no value are skipped.
std::map<std::string, double> attribute_means(
    const RatingTable& table, const std::function<std::optional<int>(const RatingRecord&)>& get) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& rec : table.records) {
    const auto value = get(rec);
    if (!value.has_value()) continue;
    auto& [sum, count] = acc[rec.ad_id];
    sum += *value;
    ++count;
  }
  std::map<std::string, double> means;
  for (const auto& [ad, sc] : acc) means[ad] = sc.first / sc.second;
  return means;
}

void check_range(int value, int lo, int hi, const char* name, const RatingRecord& rec) {
  if (value < lo || value > hi) {
    std::ostringstream os;
    os << name << " " << value << " outside [" << lo << ", " << hi << "] for annotator '"
       << rec.annotator_id << "', ad '" << rec.ad_id << "'";
    raise(Err::InvalidSpec, os.str());
  }
}

}  // namespace

void validate_ratings(const RatingTable& table) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rec : table.records) {
    check_range(rec.engagement, 0, 4, "engagement", rec);
    if (rec.valence.has_value()) check_range(*rec.valence, -2, 2, "valence", rec);
    if (rec.arousal.has_value()) check_range(*rec.arousal, 0, 4, "arousal", rec);
    if (!seen.insert({rec.annotator_id, rec.ad_id}).second)
      raise(Err::InvalidSpec, "duplicate rating for annotator '" + rec.annotator_id +
                                  "', ad '" + rec.ad_id + "'");
  }
}

LabelingModel aggregate_labels(const RatingTable& table,
                               const std::vector<std::string>& required_ads) {
  std::map<std::string, std::pair<double, int>> acc;
  double total = 0.0;
  for (const auto& rec : table.records) {
    auto& [sum, count] = acc[rec.ad_id];
    sum += rec.engagement;
    ++count;
    total += rec.engagement;
  }

  std::vector<std::string> missing;
  for (const auto& ad : required_ads)
    if (acc.find(ad) == acc.end()) missing.push_back(ad);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "no ratings for " << missing.size() << " ad(s):";
    for (const auto& ad : missing) os << " '" << ad << "'";
    raise(Err::MissingRatings, os.str());
  }
  if (acc.empty()) raise(Err::MissingRatings, "rating table is empty");

  LabelingModel model;
  long n = 0;
  for (const auto& [ad, sc] : acc) {
    model.ad_means[ad] = sc.first / sc.second;
    n += sc.second;
  }
  model.grand_mean = total / static_cast<double>(n);
  for (const auto& [ad, mean] : model.ad_means)
    model.labels[ad] = mean >= model.grand_mean ? 1 : 0;
  return model;
}

RatingHistogram rating_histogram(const RatingTable& table) {
  if (table.records.empty()) raise(Err::Empty, "rating table is empty");
  const LabelingModel model = aggregate_labels(table);

  RatingHistogram hist;
  std::vector<double> means;
  means.reserve(model.ad_means.size());
  for (const auto& [ad, mean] : model.ad_means) {
    means.push_back(mean);
    const long bin = std::clamp<long>(std::lround(mean), 0, 4);
    ++hist.counts[static_cast<std::size_t>(bin)];
  }
  hist.mu = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  hist.sigma = population_std(means, hist.mu);
  return hist;
}

double student_t_two_sided_p(double t, int dof) {
  if (dof < 1) raise(Err::InvalidSpec, "degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double nu = static_cast<double>(dof);
  return reg_inc_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

Correlation pearson_corr(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    raise(Err::LengthMismatch, "x has " + std::to_string(x.size()) + " entries, y has " +
                                   std::to_string(y.size()));
  const long n = static_cast<long>(x.size());
  if (n < 3) raise(Err::TooShort, "correlation needs at least 3 pairs, got " + std::to_string(n));

  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (long i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) raise(Err::ConstantInput, "correlation of a constant vector");

  Correlation out;
  out.r = sxy / std::sqrt(sxx * syy);
  const double r2 = std::min(out.r * out.r, 1.0);
  if (1.0 - r2 <= 0.0) {
    out.p = 0.0;
  } else {
    const double t = out.r * std::sqrt(static_cast<double>(n - 2) / (1.0 - r2));
    out.p = student_t_two_sided_p(t, static_cast<int>(n - 2));
  }
  return out;
}

std::vector<bool> bh_fdr(const std::vector<double>& p_values, double q) {
  if (!(q > 0.0) || q > 1.0)
    raise(Err::InvalidSpec, "FDR rate must be in (0, 1], got " + std::to_string(q));
  for (double p : p_values)
    if (!(p >= 0.0) || !(p <= 1.0))
      raise(Err::InvalidP, "p-value " + std::to_string(p) + " outside [0, 1]");

  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::size_t cutoff = 0;
  for (std::size_t i = 1; i <= m; ++i)
    if (p_values[order[i - 1]] <= static_cast<double>(i) * q / static_cast<double>(m)) cutoff = i;

  std::vector<bool> significant(m, false);
  for (std::size_t i = 0; i < cutoff; ++i) significant[order[i]] = true;
  return significant;
}

CorrelationMatrix correlation_matrix(const RatingTable& table, double q) {
  const auto engagement = attribute_means(
      table, [](const RatingRecord& r) { return std::optional<int>(r.engagement); });
  const auto valence = attribute_means(table, [](const RatingRecord& r) { return r.valence; });
  const auto arousal = attribute_means(table, [](const RatingRecord& r) { return r.arousal; });

  // Only ads rated on all three attributes enter the comparison.
  std::vector<std::array<double, 3>> rows;
  for (const auto& [ad, e] : engagement) {
    const auto v = valence.find(ad);
    const auto a = arousal.find(ad);
    if (v != valence.end() && a != arousal.end()) rows.push_back({e, v->second, a->second});
  }
  if (rows.size() < 3)
    raise(Err::TooShort, "correlation matrix needs at least 3 ads rated on all attributes, got " +
                             std::to_string(rows.size()));

  std::array<std::vector<double>, 3> columns;
  for (auto& col : columns) col.reserve(rows.size());
  for (const auto& row : rows)
    for (std::size_t j = 0; j < 3; ++j) columns[j].push_back(row[j]);

  CorrelationMatrix out;
  out.n_ads = static_cast<int>(rows.size());
  std::vector<double> off_p;
  std::vector<std::pair<std::size_t, std::size_t>> off_idx;
  for (std::size_t i = 0; i < 3; ++i) {
    out.r[i][i] = 1.0;
    out.p[i][i] = 0.0;
    out.significant[i][i] = false;
    for (std::size_t j = i + 1; j < 3; ++j) {
      const Correlation c = pearson_corr(columns[i], columns[j]);
      out.r[i][j] = out.r[j][i] = c.r;
      out.p[i][j] = out.p[j][i] = c.p;
      off_p.push_back(c.p);
      off_idx.emplace_back(i, j);
    }
  }
  const std::vector<bool> mask = bh_fdr(off_p, q);
  for (std::size_t k = 0; k < off_idx.size(); ++k) {
    const auto [i, j] = off_idx[k];
    out.significant[i][j] = out.significant[j][i] = mask[k];
  }
  return out;
}

namespace {

std::optional<int> parse_optional_int(const std::string& field, std::size_t line,
                                      const char* name) {
  if (field.empty()) return std::nullopt;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    raise(Err::InvalidSpec, "line " + std::to_string(line) + ": " + name + " '" + field +
                                "' is not an integer");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

RatingTable read_ratings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::Io, "cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) raise(Err::InvalidSpec, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool full_header = line == "annotator_id,ad_id,engagement,valence,arousal";
  if (!full_header && line != "annotator_id,ad_id,engagement")
    raise(Err::InvalidSpec,
          "line 1: expected header 'annotator_id,ad_id,engagement[,valence,arousal]', got '" +
              line + "'");

  RatingTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::size_t expected = full_header ? 5 : 3;
    if (fields.size() != expected)
      raise(Err::InvalidSpec, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected) + " fields, got " +
                                  std::to_string(fields.size()));

    RatingRecord rec;
    rec.annotator_id = fields[0];
    rec.ad_id = fields[1];
    const auto engagement = parse_optional_int(fields[2], line_no, "engagement");
    if (!engagement.has_value())
      raise(Err::InvalidSpec, "line " + std::to_string(line_no) + ": engagement is required");
    rec.engagement = *engagement;
    if (full_header) {
      rec.valence = parse_optional_int(fields[3], line_no, "valence");
      rec.arousal = parse_optional_int(fields[4], line_no, "arousal");
    }
    if (rec.engagement < 0 || rec.engagement > 4)
      raise(Err::InvalidSpec, "line " + std::to_string(line_no) + ": engagement " +
                                  std::to_string(rec.engagement) + " outside [0, 4]");
    if (rec.valence.has_value() && (*rec.valence < -2 || *rec.valence > 2))
      raise(Err::InvalidSpec, "line " + std::to_string(line_no) + ": valence " +
                                  std::to_string(*rec.valence) + " outside [-2, 2]");
    if (rec.arousal.has_value() && (*rec.arousal < 0 || *rec.arousal > 4))
      raise(Err::InvalidSpec, "line " + std::to_string(line_no) + ": arousal " +
                                  std::to_string(*rec.arousal) + " outside [0, 4]");
    table.records.push_back(std::move(rec));
  }
  validate_ratings(table);
  return table;
}

void write_ratings_csv(const std::string& path, const RatingTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << "annotator_id,ad_id,engagement,valence,arousal\n";
  for (const auto& rec : table.records) {
    out << rec.annotator_id << ',' << rec.ad_id << ',' << rec.engagement << ',';
    if (rec.valence.has_value()) out << *rec.valence;
    out << ',';
    if (rec.arousal.has_value()) out << *rec.arousal;
    out << '\n';
  }
  if (!out.flush()) raise(Err::Io, "failed writing '" + path + "'");
}

}  // namespace engage
