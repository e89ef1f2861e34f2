#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "engage/error.hpp"
#include "engage/ica.hpp"
#include "engage/rng.hpp"
#include "helpers.hpp"

using engage::ArtifactCriteria;
using engage::Err;
using engage::Error;
using engage::fit_ica;
using engage::IcaConfig;
using engage::IcaModel;
using engage::ica_sources;
using engage::reject_artifact_components;
using engage::row_kurtosis;

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  const double denom = std::sqrt(ac.square().sum() * bc.square().sum());
  return denom > 0.0 ? (ac * bc).sum() / denom : 0.0;
}

//! Uniform source with zero mean and unit variance.
Eigen::VectorXd uniform_source(long n, std::mt19937_64& rng) {
  Eigen::VectorXd v(n);
  const double half_width = std::sqrt(3.0);
  for (long i = 0; i < n; ++i) v[i] = half_width * (2.0 * engage::uniform01(rng) - 1.0);
  return v;
}

//! Train of 0.3 s raised-cosine bumps at seeded positions; zero elsewhere.
Eigen::VectorXd bump_train(long n, int bumps, double amp, std::mt19937_64& rng) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
  const long len = 38;  // about 0.3 s at 128 Hz
  for (int b = 0; b < bumps; ++b) {
    const long start =
        static_cast<long>(engage::uniform01(rng) * static_cast<double>(n - len));
    for (long i = 0; i < len; ++i)
      t[start + i] += amp * 0.5 *
                      (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(len - 1)));
  }
  return t;
}

//! 14-channel Gaussian background with per-channel scales in [5, 12].
Eigen::MatrixXd background14(long n, std::mt19937_64& rng) {
  Eigen::MatrixXd x(14, n);
  for (int ch = 0; ch < 14; ++ch) {
    const double scale = 5.0 + 0.5 * ch;
    for (long i = 0; i < n; ++i) x(ch, i) = scale * engage::gaussian(rng);
  }
  return x;
}

//! Blink topography used by the planted-artifact tests.
Eigen::VectorXd blink_weights() {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(14);
  w[0] = 1.0;   // AF3
  w[13] = 1.0;  // AF4
  w[1] = 0.7;   // F7
  w[12] = 0.7;  // F8
  w[2] = 0.3;   // F3
  w[11] = 0.3;  // F4
  return w;
}

//! Index of the component whose time course best matches the template, plus
//! the squared correlation of that match.
std::pair<int, double> best_match(const Eigen::MatrixXd& sources,
                                  const Eigen::VectorXd& tmpl) {
  int best = -1;
  double best_r2 = -1.0;
  for (long i = 0; i < sources.rows(); ++i) {
    const double r = pearson(sources.row(i).transpose(), tmpl);
    if (r * r > best_r2) {
      best_r2 = r * r;
      best = static_cast<int>(i);
    }
  }
  return {best, best_r2};
}

}  // namespace

TEST_CASE("two uniform sources mixed by a rotation are recovered") {
  const long n = 4000;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(engage::mix64(seed + 100));
    Eigen::MatrixXd s(2, n);
    s.row(0) = uniform_source(n, rng).transpose();
    s.row(1) = uniform_source(n, rng).transpose();
    const double theta = 2.0 * std::numbers::pi * engage::uniform01(rng);
    Eigen::Matrix2d rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::MatrixXd x = rot * s;

    IcaConfig config;
    config.seed = seed;
    const IcaModel model = fit_ica(x, config);
    const Eigen::MatrixXd rec = ica_sources(model, x);

    const double r00 = std::abs(pearson(rec.row(0).transpose(), s.row(0).transpose()));
    const double r01 = std::abs(pearson(rec.row(0).transpose(), s.row(1).transpose()));
    const double r10 = std::abs(pearson(rec.row(1).transpose(), s.row(0).transpose()));
    const double r11 = std::abs(pearson(rec.row(1).transpose(), s.row(1).transpose()));
    const double direct = std::min(r00, r11);
    const double swapped = std::min(r01, r10);
    if (std::max(direct, swapped) >= 0.95) ++successes;
  }
  // Every seeded trial recovers the pair up to permutation and sign.
  CHECK(successes == 20);
}

TEST_CASE("k=1 on a single already-white source returns it up to sign") {
  const long n = 2000;
  std::mt19937_64 rng(engage::mix64(7));
  Eigen::MatrixXd x(1, n);
  x.row(0) = uniform_source(n, rng).transpose();

  IcaConfig config;
  config.k = 1;
  config.seed = 3;
  const IcaModel model = fit_ica(x, config);
  const Eigen::MatrixXd rec = ica_sources(model, x);
  CHECK(std::abs(pearson(rec.row(0).transpose(), x.row(0).transpose())) >= 0.999);
}

TEST_CASE("a planted frontal blink concentrates in a single component") {
  const long n = 3000;
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(engage::mix64(seed + 500));
    Eigen::MatrixXd x = background14(n, rng);
    const Eigen::VectorXd tmpl = bump_train(n, 8, 80.0, rng);
    x += blink_weights() * tmpl.transpose();

    IcaConfig config;
    config.seed = seed;
    const IcaModel model = fit_ica(x, config);
    const Eigen::MatrixXd sources = ica_sources(model, x);

    int carriers = 0;  // components capturing at least 80% of template energy
    for (long i = 0; i < sources.rows(); ++i) {
      const double r = pearson(sources.row(i).transpose(), tmpl);
      if (r * r >= 0.8) ++carriers;
    }
    if (carriers == 1) ++successes;
  }
  CHECK(successes >= 18);
}

TEST_CASE("rejection removes a planted blink and cleans the frontal channels") {
  const long n = 3000;
  std::mt19937_64 rng(engage::mix64(42));
  Eigen::MatrixXd x = background14(n, rng);
  const Eigen::VectorXd tmpl = bump_train(n, 8, 80.0, rng);
  x += blink_weights() * tmpl.transpose();

  // The contaminated frontal channels track the blink template strongly.
  CHECK(std::abs(pearson(x.row(0).transpose(), tmpl)) > 0.5);
  CHECK(std::abs(pearson(x.row(13).transpose(), tmpl)) > 0.5);

  IcaConfig config;
  config.seed = 9;
  const IcaModel model = fit_ica(x, config);
  const Eigen::MatrixXd sources = ica_sources(model, x);
  const auto [blink_idx, r2] = best_match(sources, tmpl);
  CHECK(r2 >= 0.8);

  const auto result = reject_artifact_components(model, x, ArtifactCriteria{});
  CHECK(!result.rejected.empty());
  CHECK(std::find(result.rejected.begin(), result.rejected.end(), blink_idx) !=
        result.rejected.end());
  CHECK(!result.all_rejected);

  for (int ch : {0, 1, 12, 13})
    CHECK(std::abs(pearson(result.cleaned.row(ch).transpose(), tmpl)) < 0.3);
}

TEST_CASE("gaussian-only data rejects nothing and reconstructs the input") {
  const long n = 3000;
  std::mt19937_64 rng(engage::mix64(5));
  const Eigen::MatrixXd x = background14(n, rng);

  IcaConfig config;
  config.seed = 1;
  const IcaModel model = fit_ica(x, config);
  const auto result = reject_artifact_components(model, x, ArtifactCriteria{});
  CHECK(result.rejected.empty());
  CHECK(!result.all_rejected);
  // All components kept and k equals the channel count, so the cleaned
  // signal is the input itself up to round-off.
  CHECK(testutil::max_abs_diff(result.cleaned, x) <= 1e-6 * x.cwiseAbs().maxCoeff());
}

TEST_CASE("a smooth rhythm on the frontal line is rejected by the correlation rule") {
  const long n = 3000;
  std::mt19937_64 rng(engage::mix64(17));
  Eigen::MatrixXd x = background14(n, rng);
  const Eigen::VectorXd tone = testutil::sine(1.3, 128.0, n, 40.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(14);
  for (int ch : {0, 1, 12, 13}) w[ch] = 1.0;
  x += w * tone.transpose();

  IcaConfig config;
  config.seed = 2;
  const IcaModel model = fit_ica(x, config);
  const Eigen::MatrixXd sources = ica_sources(model, x);
  const auto [tone_idx, r2] = best_match(sources, tone);
  CHECK(r2 >= 0.8);

  // A sinusoid has negative excess kurtosis, so only the frontal-mean
  // correlation rule can catch it.
  const Eigen::VectorXd kurt = row_kurtosis(sources);
  CHECK(kurt[tone_idx] < 0.0);

  const auto result = reject_artifact_components(model, x, ArtifactCriteria{});
  CHECK(std::find(result.rejected.begin(), result.rejected.end(), tone_idx) !=
        result.rejected.end());
  for (int ch : {0, 1, 12, 13})
    CHECK(std::abs(pearson(result.cleaned.row(ch).transpose(), tone)) < 0.3);
}

TEST_CASE("a spiky posterior component is rejected by the kurtosis rule") {
  const long n = 3000;
  std::mt19937_64 rng(engage::mix64(23));
  Eigen::MatrixXd x = background14(n, rng);
  // Sparse biphasic spikes: very high kurtosis, no frontal involvement.
  Eigen::VectorXd spikes = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < 12; ++s) {
    const long pos = 100 + s * 240;
    spikes[pos] = 90.0;
    spikes[pos + 1] = -90.0;
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(14);
  w[5] = 1.0;  // P7
  w[6] = 1.0;  // O1
  w[7] = 0.8;  // O2
  w[8] = 0.8;  // P8
  x += w * spikes.transpose();

  IcaConfig config;
  config.seed = 4;
  const IcaModel model = fit_ica(x, config);
  const Eigen::MatrixXd sources = ica_sources(model, x);
  const auto [spike_idx, r2] = best_match(sources, spikes);
  CHECK(r2 >= 0.8);

  const auto result = reject_artifact_components(model, x, ArtifactCriteria{});
  CHECK(std::find(result.rejected.begin(), result.rejected.end(), spike_idx) !=
        result.rejected.end());
  // Frontal channels carry no spikes; cleaning leaves them nearly untouched.
  for (int ch : {0, 1, 12, 13}) {
    const double before_after =
        (result.cleaned.row(ch) - x.row(ch)).cwiseAbs().maxCoeff();
    CHECK(before_after < 0.35 * x.row(ch).cwiseAbs().maxCoeff());
  }
  // The planted spikes are gone from the posterior channels.
  CHECK(std::abs(result.cleaned(6, 100)) < 45.0);
}

TEST_CASE("rejecting every component leaves only the channel means") {
  const long n = 500;
  std::mt19937_64 rng(engage::mix64(31));
  Eigen::MatrixXd x(3, n);
  for (int ch = 0; ch < 3; ++ch)
    for (long i = 0; i < n; ++i) x(ch, i) = 10.0 * ch + engage::gaussian(rng);

  IcaConfig config;
  config.seed = 6;
  const IcaModel model = fit_ica(x, config);
  // An impossible correlation bar rejects everything.
  ArtifactCriteria criteria;
  criteria.kurtosis_z = 1e9;
  criteria.frontal_corr = 0.0;
  criteria.frontal_channels = {0, 1, 2};
  const auto result = reject_artifact_components(model, x, criteria);
  CHECK(result.all_rejected);
  CHECK(result.rejected == std::vector<int>({0, 1, 2}));
  for (int ch = 0; ch < 3; ++ch) {
    const double mean = x.row(ch).mean();
    CHECK((result.cleaned.row(ch).array() - mean).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("unmixing, mixing, and whitening satisfy their algebra") {
  const long n = 3000;
  std::mt19937_64 rng(engage::mix64(13));
  const Eigen::MatrixXd x = background14(n, rng);

  IcaConfig config;
  config.seed = 11;
  const IcaModel model = fit_ica(x, config);

  const long k = model.unmixing.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  CHECK(testutil::max_abs_diff(model.unmixing * model.mixing, eye) <= 1e-6);

  // Whitened data has identity covariance under the fitting normalization.
  const Eigen::MatrixXd centered = x.colwise() - model.mean;
  const Eigen::MatrixXd z = model.whitening * centered;
  const Eigen::MatrixXd cov = z * z.transpose() / static_cast<double>(n - 1);
  CHECK(testutil::max_abs_diff(cov, eye) <= 1e-6);

  // Component time courses have unit sample variance.
  const Eigen::MatrixXd sources = model.unmixing * centered;
  for (long i = 0; i < k; ++i) {
    const Eigen::ArrayXd row = sources.row(i).array();
    const double var = (row - row.mean()).square().sum() / static_cast<double>(n - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("identical seeds give bit-identical models") {
  const long n = 2000;
  std::mt19937_64 rng(engage::mix64(3));
  const Eigen::MatrixXd x = background14(n, rng);

  IcaConfig config;
  config.seed = 77;
  const IcaModel a = fit_ica(x, config);
  const IcaModel b = fit_ica(x, config);
  CHECK(testutil::max_abs_diff(a.unmixing, b.unmixing) == 0.0);
  CHECK(testutil::max_abs_diff(a.mixing, b.mixing) == 0.0);
  CHECK(testutil::max_abs_diff(a.whitening, b.whitening) == 0.0);
  CHECK(a.converged == b.converged);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("contract violations raise the advertised errors") {
  std::mt19937_64 rng(engage::mix64(1));

  SUBCASE("too few samples") {
    Eigen::MatrixXd x(4, 39);  // needs 40
    for (long i = 0; i < x.size(); ++i) x(i / 39, i % 39) = engage::gaussian(rng);
    CHECK_THROWS_AS(fit_ica(x, IcaConfig{}), Error);
    try {
      fit_ica(x, IcaConfig{});
    } catch (const Error& e) {
      CHECK(e.code() == Err::TooShort);
    }
  }

  SUBCASE("k outside the channel range") {
    Eigen::MatrixXd x(3, 100);
    for (long c = 0; c < 100; ++c)
      for (long r = 0; r < 3; ++r) x(r, c) = engage::gaussian(rng);
    IcaConfig config;
    config.k = 4;
    CHECK_THROWS_AS(fit_ica(x, config), Error);
    try {
      fit_ica(x, config);
    } catch (const Error& e) {
      CHECK(e.code() == Err::InvalidSpec);
    }
    config.k = -1;
    CHECK_THROWS_AS(fit_ica(x, config), Error);
  }

  SUBCASE("rank below the requested component count") {
    Eigen::MatrixXd x(3, 200);
    for (long c = 0; c < 200; ++c) {
      x(0, c) = engage::gaussian(rng);
      x(1, c) = engage::gaussian(rng);
      x(2, c) = x(0, c) + x(1, c);  // linearly dependent row
    }
    IcaConfig config;
    config.k = 3;
    CHECK_THROWS_AS(fit_ica(x, config), Error);
    try {
      fit_ica(x, config);
    } catch (const Error& e) {
      CHECK(e.code() == Err::RankDeficient);
    }
    // Dropping to the true rank succeeds.
    config.k = 2;
    CHECK_NOTHROW(fit_ica(x, config));
  }

  SUBCASE("constant data has no variance to decompose") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 100, 3.5);
    CHECK_THROWS_AS(fit_ica(x, IcaConfig{}), Error);
    try {
      fit_ica(x, IcaConfig{});
    } catch (const Error& e) {
      CHECK(e.code() == Err::RankDeficient);
    }
  }

  SUBCASE("sources for mismatched channel counts") {
    Eigen::MatrixXd x(3, 100);
    for (long c = 0; c < 100; ++c)
      for (long r = 0; r < 3; ++r) x(r, c) = engage::gaussian(rng);
    const IcaModel model = fit_ica(x, IcaConfig{});
    const Eigen::MatrixXd other = Eigen::MatrixXd::Zero(5, 100);
    CHECK_THROWS_AS(ica_sources(model, other), Error);
    try {
      ica_sources(model, other);
    } catch (const Error& e) {
      CHECK(e.code() == Err::DimensionMismatch);
    }
  }

  SUBCASE("frontal channel index outside the data") {
    Eigen::MatrixXd x(3, 200);
    for (long c = 0; c < 200; ++c)
      for (long r = 0; r < 3; ++r) x(r, c) = engage::gaussian(rng);
    const IcaModel model = fit_ica(x, IcaConfig{});
    ArtifactCriteria criteria;
    criteria.frontal_channels = {0, 7};
    CHECK_THROWS_AS(reject_artifact_components(model, x, criteria), Error);
    try {
      reject_artifact_components(model, x, criteria);
    } catch (const Error& e) {
      CHECK(e.code() == Err::UnknownChannel);
    }
  }
}

TEST_CASE("row kurtosis matches closed forms") {
  Eigen::MatrixXd rows(2, 4);
  rows << 1.0, 2.0, 3.0, 4.0,  // population excess kurtosis exactly -1.36
      5.0, 5.0, 5.0, 5.0;      // zero variance maps to 0 by convention
  const Eigen::VectorXd kurt = row_kurtosis(rows);
  CHECK(kurt[0] == doctest::Approx(-1.36).epsilon(1e-12));
  CHECK(kurt[1] == 0.0);

  // A sinusoid sampled over whole periods: m4/m2^2 = 1.5, excess -1.5.
  Eigen::MatrixXd wave(1, 128);
  wave.row(0) = testutil::sine(8.0, 128.0, 128).transpose();
  CHECK(row_kurtosis(wave)[0] == doctest::Approx(-1.5).epsilon(1e-9));

  // Heavy-tailed spikes have large positive excess kurtosis.
  Eigen::MatrixXd spiky = Eigen::MatrixXd::Zero(1, 1000);
  spiky(0, 10) = 50.0;
  spiky(0, 500) = -50.0;
  CHECK(row_kurtosis(spiky)[0] > 100.0);
}
