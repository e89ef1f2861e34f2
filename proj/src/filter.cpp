#include "engage/filter.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "engage/error.hpp"

namespace engage {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

//! Gain magnitude of one biquad at digital angular frequency w (rad/sample).
double biquad_gain(const Biquad& q, double w) {
  const cplx z = std::polar(1.0, w);
  const cplx z2 = z * z;
  const cplx num = q.b0 * z2 + q.b1 * z + q.b2;
  const cplx den = z2 + q.a1 * z + q.a2;
  return std::abs(num / den);
}

//! Biquad with numerator (z - 1)(z + 1) and the given pole pair.
Biquad section_from_poles(const cplx& p1, const cplx& p2) {
  Biquad q;
  q.b0 = 1.0;
  q.b1 = 0.0;
  q.b2 = -1.0;
  q.a1 = -(p1 + p2).real();
  q.a2 = (p1 * p2).real();
  return q;
}

}  // namespace

std::vector<Biquad> design_bandpass(const BandpassSpec& spec, double fs) {
  if (!(fs > 0.0)) raise(Err::InvalidBand, "sample rate must be positive");
  if (!(spec.low_hz > 0.0) || !(spec.high_hz > spec.low_hz) || !(spec.high_hz < fs / 2.0)) {
    std::ostringstream os;
    os << "band [" << spec.low_hz << ", " << spec.high_hz
       << "] Hz must satisfy 0 < low < high < " << fs / 2.0;
    raise(Err::InvalidBand, os.str());
  }
  if (spec.order < 2 || spec.order % 2 != 0)
    raise(Err::InvalidBand, "order must be even and >= 2, got " + std::to_string(spec.order));

  // Prewarped analog band edges for the bilinear transform.
  const double w1 = 2.0 * fs * std::tan(kPi * spec.low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(kPi * spec.high_hz / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  const int n_proto = spec.order / 2;
  auto bilinear = [fs](const cplx& s) { return (2.0 * fs + s) / (2.0 * fs - s); };

  // Low-pass prototype pole -> two band-pass poles via s_lp = (s^2 + w0^2)/(bw s).
  auto bp_roots = [&](const cplx& proto) {
    const cplx b = bw * proto;
    const cplx disc = std::sqrt(b * b - 4.0 * w0 * w0);
    return std::pair<cplx, cplx>{(b + disc) / 2.0, (b - disc) / 2.0};
  };

  std::vector<Biquad> sections;
  for (int k = 0; k < n_proto; ++k) {
    const double angle = kPi * (2.0 * k + n_proto + 1.0) / (2.0 * n_proto);
    const cplx proto = std::polar(1.0, angle);
    if (proto.imag() < -1e-12) continue;  // conjugate handled with its partner
    auto [s1, s2] = bp_roots(proto);
    const cplx z1 = bilinear(s1);
    const cplx z2 = bilinear(s2);
    if (proto.imag() > 1e-12) {
      // Complex prototype pole: each band-pass root pairs with the conjugate
      // produced by the mirrored prototype pole.
      sections.push_back(section_from_poles(z1, std::conj(z1)));
      sections.push_back(section_from_poles(z2, std::conj(z2)));
    } else {
      // Real prototype pole: its two band-pass roots form one section.
      sections.push_back(section_from_poles(z1, z2));
    }
  }

  // Unit gain at the band center, distributed per section.
  const double wc = 2.0 * std::atan(w0 / (2.0 * fs));
  for (auto& q : sections) {
    const double g = biquad_gain(q, wc);
    if (!(g > 0.0) || !std::isfinite(g))
      raise(Err::InvalidBand, "degenerate design, band too narrow for this sample rate");
    q.b0 /= g;
    q.b1 /= g;
    q.b2 /= g;
  }
  return sections;
}

Eigen::VectorXd sosfilt(const std::vector<Biquad>& sections, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  double x0 = x.size() > 0 ? x[0] : 0.0;
  for (const auto& q : sections) {
    // Steady-state initial conditions for a step of height x0 suppress the
    // startup transient of each section.
    const double h1 = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    double s2 = (q.b2 - q.a2 * h1) * x0;
    double s1 = (q.b1 - q.a1 * h1) * x0 + s2;
    for (long i = 0; i < y.size(); ++i) {
      const double xi = y[i];
      const double yi = q.b0 * xi + s1;
      s1 = q.b1 * xi - q.a1 * yi + s2;
      s2 = q.b2 * xi - q.a2 * yi;
      y[i] = yi;
    }
    x0 *= h1;  // input step height seen by the next section
  }
  return y;
}

Eigen::MatrixXd bandpass_filter(const Eigen::MatrixXd& data, double fs,
                                const BandpassSpec& spec) {
  const auto sections = design_bandpass(spec, fs);
  const long n = data.cols();
  if (n <= 3L * spec.order)
    raise(Err::TooShort, "need more than " + std::to_string(3 * spec.order) +
                             " samples, got " + std::to_string(n));

  Eigen::MatrixXd out(data.rows(), n);
  if (!spec.zero_phase) {
    for (long ch = 0; ch < data.rows(); ++ch)
      out.row(ch) = sosfilt(sections, data.row(ch).transpose()).transpose();
    return out;
  }

  const long pad = std::min<long>(std::lround(3.0 * fs), n - 1);
  Eigen::VectorXd padded(n + 2 * pad);
  for (long ch = 0; ch < data.rows(); ++ch) {
    // Mirror padding: x[pad], ..., x[1] | x[0..n-1] | x[n-2], ..., x[n-1-pad]
    for (long i = 0; i < pad; ++i) padded[i] = data(ch, pad - i);
    padded.segment(pad, n) = data.row(ch).transpose();
    for (long i = 0; i < pad; ++i) padded[pad + n + i] = data(ch, n - 2 - i);

    Eigen::VectorXd fwd = sosfilt(sections, padded);
    fwd.reverseInPlace();
    Eigen::VectorXd bwd = sosfilt(sections, fwd);
    bwd.reverseInPlace();
    out.row(ch) = bwd.segment(pad, n).transpose();
  }
  return out;
}

}  // namespace engage
