#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgbench/gbt/tree.hpp"

namespace testsupport {

// Reference tree fit: exhaustive evaluation of every (feature, midpoint)
// candidate by explicitly re-partitioning the rows, no prefix-sum tricks.
// Nodes come back in the same preorder layout the library uses so the two
// trees can be compared slot by slot.
std::vector<ecgbench::gbt::TreeNode> oracle_fit_nodes(
    const std::vector<double>& gradients, const std::vector<double>& hessians,
    const ecgbench::tsfeat::FeatureMatrix& matrix,
    const ecgbench::gbt::TreeConfig& config);

// Empty string when the trees agree (structure exact, weights/gains to 1e-9
// relative); otherwise a description of the first difference.
std::string compare_trees(const ecgbench::gbt::Tree& tree,
                          const std::vector<ecgbench::gbt::TreeNode>& reference);

struct TreeBatteryResult {
  std::size_t trials = 0;
  std::size_t nodes_compared = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

// Fits library and reference trees on `trials` random matrices (up to
// 200 x 20, lattice-valued features with imputation-constant entries mixed
// in, varied regularisation settings) and compares them.
TreeBatteryResult run_tree_oracle_battery(std::size_t trials, std::uint64_t seed);

}  // namespace testsupport
