#pragma once

#include <Eigen/Dense>
#include <vector>

namespace engage {

//! Band-pass design parameters.  `order` is the total band-pass order and
//! must be even; the default 4 gives two biquad sections.  With `zero_phase`
//! the cascade is applied forward and backward, doubling the effective order
//! and cancelling phase distortion.
struct BandpassSpec {
  double low_hz = 0.1;
  double high_hz = 45.0;
  int order = 4;
  bool zero_phase = true;
};

//! One second-order section, direct form II transposed:
//!   y[n] = b0 x[n] + s1,  s1' = b1 x[n] - a1 y[n] + s2,  s2' = b2 x[n] - a2 y[n]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

//! Butterworth band-pass as a cascade of `order / 2` biquads, each
//! normalized to unit gain at the band center.  Throws Err::InvalidBand when
//! the edges are not 0 < low < high < fs/2 or the order is odd or < 2.
std::vector<Biquad> design_bandpass(const BandpassSpec& spec, double sample_rate_hz);

//! Band-pass each row of `data`.  In the default zero-phase mode each row is
//! mirror-padded by 3 s, run through the cascade forward and backward, then
//! cropped; with `spec.zero_phase == false` a single causal forward pass is
//! used instead.  Throws Err::TooShort when a row has fewer than
//! `3 * order + 1` samples.
Eigen::MatrixXd bandpass_filter(const Eigen::MatrixXd& data, double sample_rate_hz,
                                const BandpassSpec& spec);

//! Single-pass (causal) run of a cascade over one signal with steady-state
//! initialization; exposed for tests.
Eigen::VectorXd sosfilt(const std::vector<Biquad>& sections, const Eigen::VectorXd& x);

}  // namespace engage
