#include "ecgbench/gbt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "ecgbench/errors.hpp"

namespace ecgbench::gbt {

namespace {

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  bool default_left = true;
};

class Builder {
 public:
  Builder(const std::vector<double>& gradients,
          const std::vector<double>& hessians,
          const tsfeat::FeatureMatrix& matrix, const TreeConfig& config)
      : g_(gradients), h_(hessians), m_(matrix), cfg_(config) {}

  std::vector<TreeNode> run() {
    std::vector<std::size_t> rows(m_.num_rows());
    std::iota(rows.begin(), rows.end(), 0);
    build(rows, 0);
    return std::move(nodes_);
  }

 private:
  int build(const std::vector<std::size_t>& rows, std::size_t depth) {
    double sum_g = 0.0;
    double sum_h = 0.0;
    for (std::size_t r : rows) {
      sum_g += g_[r];
      sum_h += h_[r];
    }

    SplitChoice best;
    if (depth < cfg_.max_depth && rows.size() >= 2) {
      best = find_split(rows, sum_g, sum_h);
    }

    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (!best.found) {
      nodes_[index].is_leaf = true;
      nodes_[index].weight = -soft_threshold(sum_g, cfg_.reg_alpha) /
                             (sum_h + cfg_.reg_lambda);
      return index;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows) {
      const double v = m_.rows[r][best.feature];
      const bool goes_left =
          std::isnan(v) ? best.default_left : v < best.threshold;
      (goes_left ? left_rows : right_rows).push_back(r);
    }

    nodes_[index].is_leaf = false;
    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    nodes_[index].default_left = best.default_left;
    nodes_[index].gain = best.gain;
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows, double sum_g,
                         double sum_h) const {
    SplitChoice best;
    const double parent = sum_g * sum_g / (sum_h + cfg_.reg_lambda);
    std::vector<std::pair<double, std::size_t>> values(rows.size());

    for (std::size_t f = 0; f < m_.num_cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        values[i] = {m_.rows[rows[i]][f], rows[i]};
      }
      std::sort(values.begin(), values.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_g = 0.0;
      double left_h = 0.0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left_g += g_[values[i].second];
        left_h += h_[values[i].second];
        if (values[i].first == values[i + 1].first) continue;
        const double right_g = sum_g - left_g;
        const double right_h = sum_h - left_h;
        const double gain =
            0.5 * (left_g * left_g / (left_h + cfg_.reg_lambda) +
                   right_g * right_g / (right_h + cfg_.reg_lambda) - parent) -
            cfg_.gamma;
        if (gain > 0.0 && (!best.found || gain > best.gain)) {
          best.found = true;
          best.feature = f;
          best.threshold = (values[i].first + values[i + 1].first) / 2.0;
          best.gain = gain;
        }
      }
    }

    if (best.found) {
      best.default_left = default_direction(rows, best.feature,
                                            best.threshold);
    }
    return best;
  }

  // Fill-value rows vote first; otherwise the heavier-hessian side wins.
  bool default_direction(const std::vector<std::size_t>& rows,
                         std::size_t feature, double threshold) const {
    bool saw_fill = false;
    bool fill_left = true;
    double hess_left = 0.0;
    double hess_right = 0.0;
    for (std::size_t r : rows) {
      const double v = m_.rows[r][feature];
      if (v == cfg_.fill_value) {
        saw_fill = true;
        fill_left = v < threshold;
      }
      (v < threshold ? hess_left : hess_right) += h_[r];
    }
    if (saw_fill) return fill_left;
    return hess_left >= hess_right;
  }

  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const tsfeat::FeatureMatrix& m_;
  const TreeConfig& cfg_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

double Tree::predict(const std::vector<double>& row) const {
  if (nodes.empty()) return 0.0;
  std::size_t at = 0;
  while (!nodes[at].is_leaf) {
    const TreeNode& node = nodes[at];
    const double v = row[node.feature];
    const bool goes_left = std::isnan(v) ? node.default_left
                                         : v < node.threshold;
    at = static_cast<std::size_t>(goes_left ? node.left : node.right);
  }
  return nodes[at].weight;
}

Tree fit_tree(const std::vector<double>& gradients,
              const std::vector<double>& hessians,
              const tsfeat::FeatureMatrix& matrix, const TreeConfig& config) {
  const std::size_t n = matrix.num_rows();
  if (n == 0) throw DataError("cannot fit a tree on zero rows");
  if (gradients.size() != n || hessians.size() != n) {
    throw DataError("gradient/hessian length does not match the matrix");
  }
  if (config.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  for (const std::vector<double>& row : matrix.rows) {
    if (row.size() != matrix.num_cols()) {
      throw DataError("feature matrix is not rectangular");
    }
    for (double v : row) {
      if (std::isnan(v)) {
        throw DataError("feature matrix must be imputed before fitting");
      }
    }
  }

  Tree tree;
  tree.nodes = Builder(gradients, hessians, matrix, config).run();
  return tree;
}

}  // namespace ecgbench::gbt
