#include "ecgbench/gbt/model_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ecgbench/errors.hpp"

namespace ecgbench::gbt {

namespace {

nlohmann::json node_to_json(const TreeNode& node) {
  nlohmann::json j;
  if (node.is_leaf) {
    j["weight"] = node.weight;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["default_left"] = node.default_left;
    j["gain"] = node.gain;
    j["left"] = node.left;
    j["right"] = node.right;
  }
  return j;
}

TreeNode node_from_json(const nlohmann::json& j, std::size_t node_count) {
  TreeNode node;
  if (j.contains("weight")) {
    node.is_leaf = true;
    node.weight = j.at("weight").get<double>();
    return node;
  }
  node.is_leaf = false;
  node.feature = j.at("feature").get<std::size_t>();
  node.threshold = j.at("threshold").get<double>();
  node.default_left = j.at("default_left").get<bool>();
  node.gain = j.at("gain").get<double>();
  node.left = j.at("left").get<int>();
  node.right = j.at("right").get<int>();
  if (node.left < 0 || node.right < 0 ||
      static_cast<std::size_t>(node.left) >= node_count ||
      static_cast<std::size_t>(node.right) >= node_count) {
    throw ParseError("tree node child index out of range");
  }
  return node;
}

}  // namespace

std::string to_json(const BoostedModel& model) {
  nlohmann::json doc;
  doc["format"] = "boosted-trees";
  doc["base_score"] = model.base_score;
  doc["columns"] = model.column_names;

  nlohmann::json cfg;
  cfg["max_depth"] = model.config.max_depth;
  cfg["eta"] = model.config.eta;
  cfg["gamma"] = model.config.gamma;
  cfg["reg_lambda"] = model.config.reg_lambda;
  cfg["reg_alpha"] = model.config.reg_alpha;
  cfg["scale_pos_weight"] = model.config.scale_pos_weight;
  cfg["rounds"] = model.config.rounds;
  cfg["patience"] = model.config.patience;
  cfg["holdout_stride"] = model.config.holdout_stride;
  cfg["fill_value"] = model.config.fill_value;
  doc["config"] = cfg;

  doc["classes"] = nlohmann::json::array();
  for (const ClassEnsemble& ensemble : model.classes) {
    nlohmann::json c;
    c["label"] = ensemble.label;
    c["skipped"] = ensemble.skipped;
    c["trees"] = nlohmann::json::array();
    for (const Tree& tree : ensemble.trees) {
      nlohmann::json t = nlohmann::json::array();
      for (const TreeNode& node : tree.nodes) {
        t.push_back(node_to_json(node));
      }
      c["trees"].push_back(std::move(t));
    }
    doc["classes"].push_back(std::move(c));
  }
  return doc.dump(2);
}

BoostedModel from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }

  BoostedModel model;
  try {
    if (doc.at("format").get<std::string>() != "boosted-trees") {
      throw ParseError("not a boosted-trees model file");
    }
    model.base_score = doc.at("base_score").get<double>();
    model.column_names =
        doc.at("columns").get<std::vector<std::string>>();

    const nlohmann::json& cfg = doc.at("config");
    model.config.max_depth = cfg.at("max_depth").get<std::size_t>();
    model.config.eta = cfg.at("eta").get<double>();
    model.config.gamma = cfg.at("gamma").get<double>();
    model.config.reg_lambda = cfg.at("reg_lambda").get<double>();
    model.config.reg_alpha = cfg.at("reg_alpha").get<double>();
    model.config.scale_pos_weight =
        cfg.at("scale_pos_weight").get<double>();
    model.config.rounds = cfg.at("rounds").get<std::size_t>();
    model.config.patience = cfg.at("patience").get<std::size_t>();
    model.config.holdout_stride = cfg.at("holdout_stride").get<std::size_t>();
    model.config.fill_value = cfg.at("fill_value").get<double>();

    for (const nlohmann::json& c : doc.at("classes")) {
      ClassEnsemble ensemble;
      ensemble.label = c.at("label").get<std::string>();
      ensemble.skipped = c.at("skipped").get<bool>();
      for (const nlohmann::json& t : c.at("trees")) {
        Tree tree;
        for (const nlohmann::json& node : t) {
          tree.nodes.push_back(node_from_json(node, t.size()));
        }
        ensemble.trees.push_back(std::move(tree));
      }
      model.classes.push_back(std::move(ensemble));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }

  for (const ClassEnsemble& ensemble : model.classes) {
    for (const Tree& tree : ensemble.trees) {
      for (const TreeNode& node : tree.nodes) {
        if (!node.is_leaf && node.feature >= model.column_names.size()) {
          throw ParseError("tree split feature index out of range");
        }
      }
    }
  }
  return model;
}

void save_boosted_model(const BoostedModel& model,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << to_json(model) << '\n';
  if (!out) throw DataError("failed to write '" + path.string() + "'");
}

BoostedModel load_boosted_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace ecgbench::gbt
