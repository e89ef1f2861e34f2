#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace engage {

//! One annotator's scores for one ad.  Engagement is required (0..4);
//! valence (-2..2) and arousal (0..4) are optional attributes.
struct RatingRecord {
  std::string annotator_id;
  std::string ad_id;
  int engagement = 0;
  std::optional<int> valence;
  std::optional<int> arousal;
};

struct RatingTable {
  std::vector<RatingRecord> records;
};

//! Range and uniqueness checks; throws Err::InvalidSpec with the offending
//! record spelled out.
void validate_ratings(const RatingTable& table);

//! Ground-truth labeling: per-ad mean engagement thresholded by the grand
//! mean of all individual ratings.  An ad mean exactly at the threshold
//! labels 1.
struct LabelingModel {
  std::map<std::string, double> ad_means;
  double grand_mean = 0.0;
  std::map<std::string, int> labels;
};

//! Throws Err::MissingRatings listing any of `required_ads` that have no
//! rating; with the default empty list every rated ad is accepted as-is.
LabelingModel aggregate_labels(const RatingTable& table,
                               const std::vector<std::string>& required_ads = {});

//! Engagement distribution summary: per-ad mean ratings binned to the
//! nearest scale value, plus a maximum-likelihood Gaussian (population
//! sigma) over the unbinned means.
struct RatingHistogram {
  std::array<int, 5> counts{};
  double mu = 0.0;
  double sigma = 0.0;
};

RatingHistogram rating_histogram(const RatingTable& table);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

//! Sample Pearson correlation with a two-sided p-value from the Student-t
//! transform on n - 2 degrees of freedom.  Throws Err::TooShort for n < 3,
//! Err::ConstantInput when either vector has zero variance,
//! Err::LengthMismatch for unequal lengths.
Correlation pearson_corr(const std::vector<double>& x, const std::vector<double>& y);

//! Benjamini-Hochberg step-up at rate q: with sorted p-values, find the
//! largest k with p(k) <= k q / m and mark those k hypotheses, mapped back
//! to input order.  Throws Err::InvalidP for p outside [0, 1],
//! Err::InvalidSpec for q outside (0, 1].
std::vector<bool> bh_fdr(const std::vector<double>& p_values, double q = 0.05);

//! Pairwise correlations between per-ad mean engagement, valence, and
//! arousal (attribute order as listed).  Off-diagonal p-values are jointly
//! FDR-corrected; the diagonal is fixed at r = 1 and never marked
//! significant.  Requires at least 3 ads rated on all three attributes.
struct CorrelationMatrix {
  std::array<std::string, 3> attributes = {"engagement", "valence", "arousal"};
  std::array<std::array<double, 3>, 3> r{};
  std::array<std::array<double, 3>, 3> p{};
  std::array<std::array<bool, 3>, 3> significant{};
  int n_ads = 0;
};

CorrelationMatrix correlation_matrix(const RatingTable& table, double q = 0.05);

//! Two-sided tail probability of a Student-t statistic via the regularized
//! incomplete beta function; exposed for tests.
double student_t_two_sided_p(double t, int dof);

//! CSV with header `annotator_id,ad_id,engagement,valence,arousal`; the
//! last two columns may be empty or absent entirely.  Parse failures raise
//! Err::InvalidSpec naming the line, I/O failures Err::Io.
RatingTable read_ratings_csv(const std::string& path);
void write_ratings_csv(const std::string& path, const RatingTable& table);

}  // namespace engage
