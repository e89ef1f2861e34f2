#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "engage/features.hpp"
#include "engage/model.hpp"
#include "engage/types.hpp"

namespace engage {

//! Repeated stratified cross-validation plan.  Repetition r derives its
//! fold split from base_seed + r.
struct CvPlan {
  int folds = 5;
  int repetitions = 10;
  std::uint64_t base_seed = 0;
  bool group_by_ad = false;       // keep every ad's epochs in one fold
  bool group_by_subject = false;  // keep every subject's epochs in one fold
  bool permute_labels = false;    // seeded label shuffle before splitting
};

//! Fold assignment: per class, indices are shuffled and dealt round-robin
//! with a fold cursor carried across classes, so per-class counts differ by
//! at most one across folds and total sizes stay balanced.  Returns k index
//! lists covering [0, n) exactly once; a class smaller than k simply skips
//! some folds.  Throws Err::TooFewSamples when n < k or a class is absent,
//! Err::InvalidSpec for k < 2, Err::Empty for no labels.
std::vector<std::vector<int>> stratified_kfold(const Eigen::VectorXi& y, int k,
                                               std::uint64_t seed);

//! Same contract with epochs grouped by a shared key (ad or subject): a
//! group never spans folds.  Stratification uses each group's label when
//! the group is label-pure; mixed groups are balanced by majority label.
std::vector<std::vector<int>> grouped_stratified_kfold(const Eigen::VectorXi& y,
                                                       const std::vector<std::string>& group_keys,
                                                       int k, std::uint64_t seed);

//! F1 for the positive class: 2PR / (P + R), 0 whenever there are no true
//! or no predicted positives.  Throws Err::LengthMismatch / Err::Empty.
double f1_score(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred);

//! One train/evaluate pass over a single fold: PCA fit on the training rows
//! only, scores standardized to training-fold statistics, classifier tuned
//! and fit on the standardized training rows, F1 measured on the held-out
//! rows.
struct FoldOutcome {
  double f1 = 0.0;
  int pca_k = 0;
  double chosen_c = 0.0;
  double chosen_gamma = 0.0;
  Eigen::VectorXi predictions;
};

FoldOutcome run_single_fold(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const std::vector<int>& train, const std::vector<int>& test,
                            const PcaTarget& pca, const ModelConfig& model,
                            std::uint64_t seed);

//! One experiment cell: repetitions x folds F1 values in run order
//! (repetition-major), plus their mean and population standard deviation.
struct CellResult {
  ClassifierKind classifier = ClassifierKind::Lda;
  WindowMode window = WindowMode::F30;
  std::vector<double> per_run_f1;
  double f1_mean = 0.0;
  double f1_std = 0.0;
};

CellResult run_repeated_cv(const Dataset& dataset, WindowMode window,
                           const FeatureConfig& features, const ModelConfig& model,
                           const CvPlan& plan, int jobs = 1);

//! Full grid: {LDA, LSVM, RSVM} x {F30, L30, L10} in that fixed order.
//! Identical per-cell results to run_repeated_cv; PCA fits are shared
//! across classifiers within a (window, repetition, fold) triple because
//! they do not depend on the classifier.
std::vector<CellResult> experiment_matrix(const Dataset& dataset, const FeatureConfig& features,
                                          const ModelConfig& base_model, const CvPlan& plan,
                                          int jobs = 1);

//! Plain-text results table; every cell is "mean +/- std" with four decimal
//! places, e.g. "0.7091 ± 0.0224".
std::string render_table(const std::vector<CellResult>& cells);

//! JSON report: {"config_fingerprint": ..., "cells": [...]}.
std::string report_json(const std::vector<CellResult>& cells,
                        const std::string& config_fingerprint);

//! Labels for a dataset in epoch order; throws Err::InvalidSpec when an
//! epoch is unlabeled.  Applies the plan's seeded permutation when asked.
Eigen::VectorXi dataset_labels(const Dataset& dataset, const CvPlan& plan);

}  // namespace engage
