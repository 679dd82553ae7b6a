#include "ecgbench/gbt/booster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ecgbench/errors.hpp"

namespace ecgbench::gbt {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logloss(const std::vector<double>& margins,
               const std::vector<char>& truth,
               const std::vector<std::size_t>& rows) {
  double sum = 0.0;
  for (std::size_t r : rows) {
    const double p =
        std::clamp(sigmoid(margins[r]), 1e-15, 1.0 - 1e-15);
    sum += truth[r] ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(rows.size());
}

void validate_config(const BoostConfig& config) {
  if (config.max_depth < 2 || config.max_depth > 100) {
    throw ConfigError("max_depth must be in [2, 100]");
  }
  if (!(config.eta > 0.0) || !(config.reg_lambda > 0.0) ||
      !(config.scale_pos_weight > 0.0)) {
    throw ConfigError("eta, reg_lambda and scale_pos_weight must be positive");
  }
  if (config.gamma < 0.0 || config.reg_alpha < 0.0) {
    throw ConfigError("gamma and reg_alpha must be non-negative");
  }
  if (config.rounds < 1) throw ConfigError("rounds must be >= 1");
}

}  // namespace

BoostedModel fit_ovr(const tsfeat::FeatureMatrix& matrix,
                     const std::vector<std::vector<std::string>>& labels,
                     const std::vector<std::string>& vocabulary,
                     const BoostConfig& config,
                     std::vector<std::string>* warnings) {
  if (vocabulary.empty()) throw ConfigError("class vocabulary is empty");
  validate_config(config);
  const std::size_t n = matrix.num_rows();
  if (n == 0) throw DataError("cannot fit on zero rows");
  if (labels.size() != n) {
    throw DataError("label list does not match the matrix rows");
  }

  // Permutation-invariant holdout: walk rows in record-id order and keep
  // every holdout_stride-th one for early stopping.
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
    return matrix.row_ids[a] != matrix.row_ids[b]
               ? matrix.row_ids[a] < matrix.row_ids[b]
               : a < b;
  });
  std::vector<char> held(n, 0);
  if (config.holdout_stride >= 2) {
    for (std::size_t pos = config.holdout_stride - 1; pos < n;
         pos += config.holdout_stride) {
      held[by_id[pos]] = 1;
    }
  }
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> valid_rows;
  for (std::size_t r = 0; r < n; ++r) {
    (held[r] ? valid_rows : train_rows).push_back(r);
  }
  if (train_rows.empty()) {
    train_rows = valid_rows;  // degenerate tiny set: train on everything
    valid_rows.clear();
  }

  tsfeat::FeatureMatrix train_matrix;
  train_matrix.column_names = matrix.column_names;
  train_matrix.row_ids.reserve(train_rows.size());
  train_matrix.rows.reserve(train_rows.size());
  for (std::size_t r : train_rows) {
    train_matrix.row_ids.push_back(matrix.row_ids[r]);
    train_matrix.rows.push_back(matrix.rows[r]);
  }

  TreeConfig tree_config;
  tree_config.max_depth = config.max_depth;
  tree_config.gamma = config.gamma;
  tree_config.reg_lambda = config.reg_lambda;
  tree_config.reg_alpha = config.reg_alpha;
  tree_config.fill_value = config.fill_value;

  BoostedModel model;
  model.base_score = 0.0;
  model.column_names = matrix.column_names;
  model.config = config;

  for (const std::string& symbol : vocabulary) {
    ClassEnsemble ensemble;
    ensemble.label = symbol;

    std::vector<char> truth(n, 0);
    std::size_t positives = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::find(labels[r].begin(), labels[r].end(), symbol) !=
          labels[r].end()) {
        truth[r] = 1;
        ++positives;
      }
    }
    if (positives == 0) {
      ensemble.skipped = true;
      if (warnings != nullptr) {
        warnings->push_back("class '" + symbol +
                            "' has no positive examples; skipped");
      }
      model.classes.push_back(std::move(ensemble));
      continue;
    }

    std::vector<double> margins(n, model.base_score);
    std::vector<double> grad(train_rows.size());
    std::vector<double> hess(train_rows.size());

    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_round = 0;
    for (std::size_t round = 1; round <= config.rounds; ++round) {
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        const std::size_t r = train_rows[i];
        const double p = sigmoid(margins[r]);
        const double weight = truth[r] ? config.scale_pos_weight : 1.0;
        grad[i] = weight * (p - (truth[r] ? 1.0 : 0.0));
        hess[i] = weight * p * (1.0 - p);
      }
      Tree tree = fit_tree(grad, hess, train_matrix, tree_config);
      for (std::size_t r = 0; r < n; ++r) {
        margins[r] += config.eta * tree.predict(matrix.rows[r]);
      }
      ensemble.trees.push_back(std::move(tree));

      if (!valid_rows.empty()) {
        const double loss = logloss(margins, truth, valid_rows);
        if (loss < best_loss) {
          best_loss = loss;
          best_round = round;
        } else if (round - best_round >= config.patience) {
          break;
        }
      }
    }
    if (!valid_rows.empty()) {
      ensemble.trees.resize(best_round);
    }
    model.classes.push_back(std::move(ensemble));
  }
  return model;
}

std::vector<std::vector<double>> predict_proba(
    const BoostedModel& model, const tsfeat::FeatureMatrix& features) {
  std::unordered_map<std::string, std::size_t> where;
  where.reserve(features.column_names.size());
  for (std::size_t c = 0; c < features.column_names.size(); ++c) {
    where.emplace(features.column_names[c], c);
  }
  std::vector<std::size_t> source(model.column_names.size());
  for (std::size_t c = 0; c < model.column_names.size(); ++c) {
    const auto it = where.find(model.column_names[c]);
    if (it == where.end()) {
      throw SchemaError("feature matrix is missing column '" +
                        model.column_names[c] + "'");
    }
    source[c] = it->second;
  }

  std::vector<std::vector<double>> probabilities(
      features.num_rows(), std::vector<double>(model.classes.size(), 0.0));
  std::vector<double> row(model.column_names.size());
  for (std::size_t r = 0; r < features.num_rows(); ++r) {
    if (features.rows[r].size() != features.num_cols()) {
      throw DataError("feature matrix is not rectangular");
    }
    for (std::size_t c = 0; c < source.size(); ++c) {
      row[c] = features.rows[r][source[c]];
    }
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
      double margin = model.base_score;
      for (const Tree& tree : model.classes[k].trees) {
        margin += model.config.eta * tree.predict(row);
      }
      probabilities[r][k] = sigmoid(margin);
    }
  }
  return probabilities;
}

std::vector<std::vector<std::string>> predict_labels(
    const BoostedModel& model, const tsfeat::FeatureMatrix& features,
    double threshold) {
  const std::vector<std::vector<double>> probabilities =
      predict_proba(model, features);
  std::vector<std::vector<std::string>> out(probabilities.size());
  for (std::size_t r = 0; r < probabilities.size(); ++r) {
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
      if (probabilities[r][k] >= threshold) {
        out[r].push_back(model.classes[k].label);
      }
    }
  }
  return out;
}

std::map<std::string, double> importance(const BoostedModel& model) {
  std::map<std::string, double> gains;
  for (const ClassEnsemble& ensemble : model.classes) {
    for (const Tree& tree : ensemble.trees) {
      for (const TreeNode& node : tree.nodes) {
        if (!node.is_leaf) {
          gains[model.column_names[node.feature]] += node.gain;
        }
      }
    }
  }
  return gains;
}

}  // namespace ecgbench::gbt
