#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "engage/error.hpp"
#include "engage/filter.hpp"
#include "helpers.hpp"

using engage::BandpassSpec;
using engage::bandpass_filter;
using engage::design_bandpass;
using engage::Err;
using engage::Error;
using testutil::rms;
using testutil::sine;

namespace {

constexpr double kFs = 128.0;

// RMS gain of the default band-pass at one frequency, measured on the
// central region (edges discarded) of a 20 s tone.
double tone_gain(double freq_hz, bool zero_phase = true) {
  const long n = static_cast<long>(20 * kFs);
  Eigen::MatrixXd x(1, n);
  x.row(0) = sine(freq_hz, kFs, n).transpose();
  BandpassSpec spec;
  spec.zero_phase = zero_phase;
  const Eigen::MatrixXd y = bandpass_filter(x, kFs, spec);
  const long lo = static_cast<long>(5 * kFs);
  const long len = static_cast<long>(10 * kFs);
  return rms(y.row(0).segment(lo, len).transpose()) /
         rms(x.row(0).segment(lo, len).transpose());
}

}  // namespace

TEST_CASE("design rejects invalid bands and orders") {
  auto expect_invalid = [](BandpassSpec spec) {
    CHECK_THROWS_AS(design_bandpass(spec, kFs), Error);
    try {
      design_bandpass(spec, kFs);
    } catch (const Error& e) {
      CHECK(e.code() == Err::InvalidBand);
    }
  };
  expect_invalid({45.0, 0.1, 4, true});   // reversed edges
  expect_invalid({0.0, 45.0, 4, true});   // low edge at DC
  expect_invalid({0.1, 64.0, 4, true});   // high edge at Nyquist
  expect_invalid({0.1, 45.0, 3, true});   // odd order
  expect_invalid({0.1, 45.0, 0, true});   // no sections
}

TEST_CASE("default design yields two finite biquads") {
  const auto sections = design_bandpass(BandpassSpec{}, kFs);
  CHECK(sections.size() == 2);
  for (const auto& s : sections) {
    CHECK(std::isfinite(s.b0));
    CHECK(std::isfinite(s.a1));
    CHECK(std::isfinite(s.a2));
  }
}

TEST_CASE("constant input is attenuated by at least 40 dB") {
  const long n = static_cast<long>(20 * kFs);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, n, 100.0);
  const Eigen::MatrixXd y = bandpass_filter(x, kFs, BandpassSpec{});
  const long lo = static_cast<long>(1 * kFs);
  const long len = n - 2 * lo;
  const double out_rms = rms(y.row(0).segment(lo, len).transpose());
  CHECK(out_rms <= 100.0 * std::pow(10.0, -40.0 / 20.0));
}

TEST_CASE("10 Hz tone passes with gain in [0.9, 1.1]") {
  const double g = tone_gain(10.0);
  CHECK(g >= 0.9);
  CHECK(g <= 1.1);
}

TEST_CASE("60 Hz tone is attenuated below 0.1x (>= 20 dB)") {
  const double g = tone_gain(60.0);
  CHECK(g < 0.1);
}

TEST_CASE("filter is linear") {
  const long n = static_cast<long>(8 * kFs);
  Eigen::MatrixXd x(1, n), y(1, n);
  std::mt19937_64 rng(11);
  for (long i = 0; i < n; ++i) {
    x(0, i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    y(0, i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  }
  const double a = 2.5, b = -1.25;
  const BandpassSpec spec;
  const Eigen::MatrixXd lhs = bandpass_filter(a * x + b * y, kFs, spec);
  const Eigen::MatrixXd rhs = a * bandpass_filter(x, kFs, spec) + b * bandpass_filter(y, kFs, spec);
  const double scale = rhs.cwiseAbs().maxCoeff();
  CHECK(testutil::max_abs_diff(lhs, rhs) <= 1e-9 * (1.0 + scale));
}

TEST_CASE("zero-phase output keeps an in-band tone's phase within 1 degree") {
  const long n = static_cast<long>(20 * kFs);
  Eigen::MatrixXd x(1, n);
  x.row(0) = sine(10.0, kFs, n).transpose();
  const Eigen::MatrixXd y = bandpass_filter(x, kFs, BandpassSpec{});
  const long lo = static_cast<long>(5 * kFs);
  const long len = static_cast<long>(10 * kFs);
  const Eigen::VectorXd ref_sin = sine(10.0, kFs, n).segment(lo, len);
  const Eigen::VectorXd ref_cos =
      sine(10.0, kFs, n, 1.0, std::numbers::pi / 2.0).segment(lo, len);
  const Eigen::VectorXd seg = y.row(0).segment(lo, len).transpose();
  const double phase = std::atan2(seg.dot(ref_cos), seg.dot(ref_sin));
  CHECK(std::abs(phase) < std::numbers::pi / 180.0);
}

TEST_CASE("causal mode applies a single forward pass") {
  const long n = static_cast<long>(20 * kFs);
  Eigen::MatrixXd x(2, n);
  x.row(0) = sine(10.0, kFs, n).transpose();
  x.row(1) = sine(7.0, kFs, n).transpose();
  BandpassSpec causal;
  causal.zero_phase = false;
  const Eigen::MatrixXd y = bandpass_filter(x, kFs, causal);

  // Identical to running the designed cascade directly on each row.
  const auto sections = design_bandpass(causal, kFs);
  for (int ch = 0; ch < 2; ++ch) {
    const Eigen::VectorXd direct = engage::sosfilt(sections, x.row(ch).transpose());
    CHECK(testutil::max_abs_diff(y.row(ch), direct.transpose()) == 0.0);
  }

  // A causal IIR pass shifts the phase of a 10 Hz tone noticeably, unlike
  // the zero-phase mode.
  const long lo = static_cast<long>(5 * kFs);
  const long len = static_cast<long>(10 * kFs);
  const Eigen::VectorXd ref_sin = sine(10.0, kFs, n).segment(lo, len);
  const Eigen::VectorXd ref_cos =
      sine(10.0, kFs, n, 1.0, std::numbers::pi / 2.0).segment(lo, len);
  const Eigen::VectorXd seg = y.row(0).segment(lo, len).transpose();
  const double phase = std::atan2(seg.dot(ref_cos), seg.dot(ref_sin));
  CHECK(std::abs(phase) > std::numbers::pi / 180.0);
  const double gain = rms(seg) / rms(ref_sin);
  CHECK(gain >= 0.8);
  CHECK(gain <= 1.1);
}

TEST_CASE("rows are filtered independently") {
  const long n = static_cast<long>(6 * kFs);
  Eigen::MatrixXd x(2, n);
  x.row(0) = sine(5.0, kFs, n).transpose();
  x.row(1) = sine(20.0, kFs, n, 3.0).transpose();
  const BandpassSpec spec;
  const Eigen::MatrixXd both = bandpass_filter(x, kFs, spec);
  for (int ch = 0; ch < 2; ++ch) {
    const Eigen::MatrixXd alone = bandpass_filter(x.row(ch), kFs, spec);
    CHECK(testutil::max_abs_diff(both.row(ch), alone.row(0)) == 0.0);
  }
}

TEST_CASE("output shape equals input shape") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 500);
  const Eigen::MatrixXd y = bandpass_filter(x, kFs, BandpassSpec{});
  CHECK(y.rows() == 3);
  CHECK(y.cols() == 500);
  CHECK(y.allFinite());
}

TEST_CASE("too few samples raises TooShort") {
  // Order 4 requires more than 3 * 4 samples per row.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 12);
  CHECK_THROWS_AS(bandpass_filter(x, kFs, BandpassSpec{}), Error);
  try {
    bandpass_filter(x, kFs, BandpassSpec{});
  } catch (const Error& e) {
    CHECK(e.code() == Err::TooShort);
  }
  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(1, 13);
  CHECK_NOTHROW(bandpass_filter(ok, kFs, BandpassSpec{}));
}

TEST_CASE("sosfilt starts in steady state") {
  // With steady-state initialization a constant input produces the DC-gain
  // response from the first sample; a band-pass has DC gain 0, so the whole
  // output is (numerically) zero with no start-up transient.
  const auto sections = design_bandpass(BandpassSpec{}, kFs);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(256, 50.0);
  const Eigen::VectorXd y = engage::sosfilt(sections, x);
  CHECK(y.cwiseAbs().maxCoeff() <= 1e-9);
}
