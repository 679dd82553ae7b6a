#pragma once

#include <cstddef>
#include <vector>

#include "ecgbench/tsfeat/matrix.hpp"

namespace ecgbench::gbt {

// One node of a regression tree.  Rows with value < threshold go left;
// missing (NaN) values follow default_left.
struct TreeNode {
  bool is_leaf = true;
  double weight = 0.0;  // leaf output

  std::size_t feature = 0;  // column index into the training matrix
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;  // realized split gain
  int left = -1;
  int right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root; empty tree outputs 0

  // `row` is a feature vector in training-column order.
  double predict(const std::vector<double>& row) const;
};

struct TreeConfig {
  std::size_t max_depth = 6;
  double gamma = 0.0;       // minimum gain to keep a split
  double reg_lambda = 1.0;  // L2 on leaf weights
  double reg_alpha = 0.0;   // L1 on leaf weights
  double fill_value = -999.0;  // imputation constant observed at fit time
};

// Exact greedy regression tree on second-order statistics: each split
// maximizes  1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)]
// - gamma  over every (feature, midpoint threshold) pair; non-positive-gain
// splits are rejected and the node becomes a leaf with weight
// -soft_threshold(G, alpha) / (H + lambda).  Ties break to the lowest
// feature index, then the lowest threshold.  The default direction of a
// split is the side its fill-value rows route to, or the heavier-hessian
// side when the node saw no fill values in that feature.
// Throws DataError when the matrix has no rows or the vectors disagree.
Tree fit_tree(const std::vector<double>& gradients,
              const std::vector<double>& hessians,
              const tsfeat::FeatureMatrix& matrix, const TreeConfig& config);

}  // namespace ecgbench::gbt
