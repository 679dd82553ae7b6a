#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ecgbench/gbt/tree.hpp"
#include "ecgbench/tsfeat/matrix.hpp"

namespace ecgbench::gbt {

struct BoostConfig {
  std::size_t max_depth = 6;
  double eta = 0.3;
  double gamma = 0.0;
  double reg_lambda = 1.0;
  double reg_alpha = 0.0;
  double scale_pos_weight = 1.0;
  std::size_t rounds = 200;
  std::size_t patience = 20;  // early-stop rounds without improvement
  // Every (stride)-th row of the id-sorted order is held out for early
  // stopping; 0 disables the holdout and early stopping entirely.
  std::size_t holdout_stride = 5;
  double fill_value = -999.0;
};

// One-vs-rest ensemble for a single class label.
struct ClassEnsemble {
  std::string label;
  std::vector<Tree> trees;
  bool skipped = false;  // no positive examples were available
};

struct BoostedModel {
  double base_score = 0.0;  // prior logit shared by every class
  std::vector<std::string> column_names;
  std::vector<ClassEnsemble> classes;
  BoostConfig config;
};

// Fits one logistic-loss boosted ensemble per vocabulary entry over the
// imputed feature matrix.  `labels[i]` is the label set of row i.
// scale_pos_weight multiplies gradients and hessians of positive rows.
// Early stopping watches held-out logloss (rows chosen by sorted record id,
// so row order never changes the model) and truncates each ensemble to its
// best round.  Classes without a positive example are skipped with a note
// in `warnings`.  Throws ConfigError on an empty vocabulary or invalid
// config, DataError on size mismatches.
BoostedModel fit_ovr(const tsfeat::FeatureMatrix& matrix,
                     const std::vector<std::vector<std::string>>& labels,
                     const std::vector<std::string>& vocabulary,
                     const BoostConfig& config,
                     std::vector<std::string>* warnings = nullptr);

// Per-class probabilities sigma(base + sum of tree outputs), one row per
// matrix row.  The matrix must contain every training column (extra columns
// are ignored); a missing column raises SchemaError.
std::vector<std::vector<double>> predict_proba(
    const BoostedModel& model, const tsfeat::FeatureMatrix& features);

// Label sets obtained by thresholding predict_proba at `threshold`.
std::vector<std::vector<std::string>> predict_labels(
    const BoostedModel& model, const tsfeat::FeatureMatrix& features,
    double threshold = 0.5);

// Total realized split gain per feature name, summed over every tree of
// every class.  Features that never split are absent.
std::map<std::string, double> importance(const BoostedModel& model);

}  // namespace ecgbench::gbt
