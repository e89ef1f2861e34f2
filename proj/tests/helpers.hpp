#pragma once

// Shared scaffolding for the test binaries: scratch directories, small
// signal builders, and numeric helpers.

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include "engage/types.hpp"

namespace testutil {

//! Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(++counter) + "-" +
             std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xffff));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline double rms(const Eigen::VectorXd& v) {
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

inline Eigen::VectorXd sine(double freq_hz, double fs, long n, double amp = 1.0,
                            double phase = 0.0) {
  Eigen::VectorXd out(n);
  for (long i = 0; i < n; ++i)
    out[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs +
                            phase);
  return out;
}

//! Epoch with constant-valued baseline and stimulus on the 14-channel layout.
inline engage::Epoch flat_epoch(double baseline_value, double stimulus_value,
                                int baseline_samples = 128, int stimulus_samples = 256) {
  engage::Epoch e;
  e.id = "t_e";
  e.subject_id = "t";
  e.ad_id = "e";
  e.baseline = Eigen::MatrixXd::Constant(14, baseline_samples, baseline_value);
  e.stimulus = Eigen::MatrixXd::Constant(14, stimulus_samples, stimulus_value);
  return e;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
