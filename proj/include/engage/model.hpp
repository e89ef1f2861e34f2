#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "engage/lda.hpp"
#include "engage/svm.hpp"

namespace engage {

enum class ClassifierKind { Lda, LinearSvm, RbfSvm };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& name);

//! Hyper-parameter search space: log-spaced decades from 1e-3 to 1e3 on
//! both axes by default.  Linear SVMs use the C axis only.
struct GridSpec {
  std::vector<double> c_values;
  std::vector<double> gamma_values;
  int inner_folds = 5;

  static GridSpec defaults();
};

//! `points` values spaced evenly in log10 between lo and hi, inclusive.
std::vector<double> log_spaced(double lo, double hi, int points);

struct ModelConfig {
  ClassifierKind kind = ClassifierKind::RbfSvm;
  LdaConfig lda;
  double svm_tol = 1e-3;
  long svm_max_iter = 100000;
  GridSpec grid = GridSpec::defaults();
};

struct GridPoint {
  double c = 0.0;
  double gamma = 0.0;  // 0 for linear kernels
  double mean_f1 = 0.0;
};

struct GridChoice {
  GridPoint best;
  std::vector<GridPoint> evaluated;  // C-major, gamma-minor order
};

//! Mean inner-cross-validated F1 for every grid point, shared stratified
//! folds across points.  Ties keep the smaller C, then the smaller gamma
//! (points are visited in ascending order and replaced only on a strict
//! improvement).  Throws Err::TooFewSamples when either class has fewer
//! members than `inner_folds`.
GridChoice grid_search(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, ClassifierKind kind,
                       const GridSpec& grid, double svm_tol, long svm_max_iter,
                       std::uint64_t seed);

//! One fitted classifier of any kind plus the hyper-parameters it used.
struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Lda;
  LdaModel lda;
  SvmModel svm;
  double chosen_c = 0.0;
  double chosen_gamma = 0.0;
};

//! Tunes (SVMs only), then fits on all rows with the chosen parameters.
TrainedModel fit_classifier(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const ModelConfig& config, std::uint64_t seed);

Eigen::VectorXd decision_scores(const TrainedModel& model, const Eigen::MatrixXd& x);

//! Score >= 0 maps to label 1, so an exact tie resolves to 1.
Eigen::VectorXi predict(const TrainedModel& model, const Eigen::MatrixXd& x);

}  // namespace engage
