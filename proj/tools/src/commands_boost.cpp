#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "ecgbench/errors.hpp"
#include "ecgbench/evalkit/report.hpp"
#include "ecgbench/gbt/booster.hpp"
#include "ecgbench/gbt/model_io.hpp"
#include "ecgbench/tsfeat/importance.hpp"
#include "ecgbench/tsfeat/matrix.hpp"
#include "ecgbench/util/csv.hpp"
#include "ecgbench/util/rng.hpp"

namespace ecgtool {

using ecgbench::ConfigError;
using ecgbench::DataError;
namespace evalkit = ecgbench::evalkit;
namespace gbt = ecgbench::gbt;
namespace tsfeat = ecgbench::tsfeat;

namespace {

// The rows fit_ovr holds out for early stopping: every stride-th position of
// the record-id-sorted order.
std::vector<std::size_t> holdout_rows(const tsfeat::FeatureMatrix& matrix,
                                      std::size_t stride) {
  std::vector<std::size_t> by_id(matrix.num_rows());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
    return matrix.row_ids[a] != matrix.row_ids[b]
               ? matrix.row_ids[a] < matrix.row_ids[b]
               : a < b;
  });
  std::vector<std::size_t> rows;
  for (std::size_t pos = stride - 1; pos < by_id.size(); pos += stride) {
    rows.push_back(by_id[pos]);
  }
  return rows;
}

// Mean logistic loss of the fitted (non-skipped) classes on held-out rows.
double holdout_logloss(const gbt::BoostedModel& model,
                       const tsfeat::FeatureMatrix& matrix,
                       const std::vector<std::vector<std::string>>& truth,
                       const std::vector<std::size_t>& rows) {
  const std::vector<std::vector<double>> probs =
      gbt::predict_proba(model, matrix);
  double loss = 0.0;
  std::size_t terms = 0;
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
      if (model.classes[c].skipped) continue;
      const bool positive =
          std::find(truth[r].begin(), truth[r].end(),
                    model.classes[c].label) != truth[r].end();
      const double p =
          std::min(1.0 - 1e-15, std::max(1e-15, probs[r][c]));
      loss += positive ? -std::log(p) : -std::log(1.0 - p);
      ++terms;
    }
  }
  return terms > 0 ? loss / static_cast<double>(terms)
                   : std::numeric_limits<double>::infinity();
}

// One draw from the hyperparameter search space: depth uniform over
// [2, 100], the continuous knobs log-uniform over [1e-3, 1e3]. Draw order
// is fixed so a seed fully determines the trial sequence.
gbt::BoostConfig draw_candidate(const gbt::BoostConfig& base,
                                ecgbench::Rng& rng) {
  gbt::BoostConfig candidate = base;
  candidate.max_depth = 2 + static_cast<std::size_t>(rng.uniform_below(99));
  const double log_lo = std::log(1e-3);
  const double log_hi = std::log(1e3);
  candidate.gamma = std::exp(rng.uniform(log_lo, log_hi));
  candidate.eta = std::exp(rng.uniform(log_lo, log_hi));
  candidate.scale_pos_weight = std::exp(rng.uniform(log_lo, log_hi));
  candidate.reg_lambda = std::exp(rng.uniform(log_lo, log_hi));
  candidate.reg_alpha = std::exp(rng.uniform(log_lo, log_hi));
  return candidate;
}

ordered_json boost_config_json(const gbt::BoostConfig& config) {
  ordered_json doc;
  doc["max_depth"] = config.max_depth;
  doc["eta"] = config.eta;
  doc["gamma"] = config.gamma;
  doc["lambda"] = config.reg_lambda;
  doc["alpha"] = config.reg_alpha;
  doc["scale_pos_weight"] = config.scale_pos_weight;
  return doc;
}

}  // namespace

int run_boost_train(const RunConfig& config) {
  validate_config(config, {"features"});
  const tsfeat::FeatureMatrix raw = tsfeat::load_matrix_csv(config.data);
  const tsfeat::FeatureMatrix matrix =
      tsfeat::impute_and_prune(raw, config.boost.fill_value);

  const ecgbench::wfdb::Vocabulary vocabulary = active_vocabulary(config);
  const std::vector<std::vector<std::string>> truth =
      load_truth(config, matrix.row_ids, vocabulary);

  RunManifest manifest("boost-train", config);
  std::vector<std::string> warnings;
  gbt::BoostedModel model;
  if (config.search_trials == 0) {
    model = gbt::fit_ovr(matrix, truth, vocabulary.symbols, config.boost,
                         &warnings);
  } else {
    if (config.boost.holdout_stride < 2) {
      throw ConfigError(
          "hyperparameter search scores candidates on the early-stop "
          "holdout; it needs holdout_stride >= 2");
    }
    const std::vector<std::size_t> rows =
        holdout_rows(matrix, config.boost.holdout_stride);
    if (rows.empty()) {
      throw DataError("too few records to hold any out for the search");
    }
    ecgbench::Rng rng = ecgbench::Rng::substream(config.seed, "search");
    ordered_json trials = ordered_json::array();
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_trial = 0;
    for (std::size_t trial = 0; trial < config.search_trials; ++trial) {
      const gbt::BoostConfig candidate = draw_candidate(config.boost, rng);
      std::vector<std::string> trial_warnings;
      gbt::BoostedModel fitted = gbt::fit_ovr(
          matrix, truth, vocabulary.symbols, candidate, &trial_warnings);
      const double loss = holdout_logloss(fitted, matrix, truth, rows);
      ordered_json entry = boost_config_json(candidate);
      entry["holdout_logloss"] = loss;
      trials.push_back(entry);
      if (loss < best_loss) {
        best_loss = loss;
        best_trial = trial;
        model = std::move(fitted);
        warnings = std::move(trial_warnings);
      }
    }
    ordered_json search_doc;
    search_doc["trials"] = trials;
    search_doc["chosen_trial"] = best_trial;
    search_doc["holdout_logloss"] = best_loss;
    const fs::path search_path = fs::path(config.out) / "search_log.json";
    write_text_file(search_path, search_doc.dump(2) + "\n");
    manifest.add_artifact(search_path);
  }
  for (const std::string& warning : warnings) manifest.add_warning(warning);

  const fs::path model_path = fs::path(config.out) / "gbt_model.json";
  fs::create_directories(config.out);
  gbt::save_boosted_model(model, model_path);
  manifest.add_artifact(model_path);

  const std::map<std::string, double> gains = gbt::importance(model);
  std::ostringstream csv;
  csv << "feature,gain\n";
  for (const auto& [feature, gain] : gains) {
    csv << ecgbench::csv_escape(feature) << ','
        << ecgbench::format_double(gain) << '\n';
  }
  const fs::path gains_path = fs::path(config.out) / "importance.csv";
  write_text_file(gains_path, csv.str());
  manifest.add_artifact(gains_path);

  const fs::path table_path = fs::path(config.out) / "importance.txt";
  write_text_file(table_path, tsfeat::render_importance(
                                  tsfeat::aggregate_importance(gains)));
  manifest.add_artifact(table_path);

  manifest.write(config.out);
  return 0;
}

int run_boost_predict(const RunConfig& config) {
  validate_config(config, {"features", "model_file"});
  const gbt::BoostedModel model =
      gbt::load_boosted_model(config.model_file);
  const tsfeat::FeatureMatrix matrix = tsfeat::load_matrix_csv(config.data);

  const std::vector<std::vector<double>> probs =
      gbt::predict_proba(model, matrix);
  std::vector<std::string> classes;
  for (const gbt::ClassEnsemble& ensemble : model.classes) {
    classes.push_back(ensemble.label);
  }
  std::vector<std::vector<std::string>> sets(probs.size());
  for (std::size_t r = 0; r < probs.size(); ++r) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (probs[r][c] >= config.threshold) sets[r].push_back(classes[c]);
    }
  }

  RunManifest manifest("boost-predict", config);
  const fs::path predictions_path = fs::path(config.out) / "predictions.csv";
  write_predictions_csv(predictions_path, matrix.row_ids, classes, probs,
                        sets);
  manifest.add_artifact(predictions_path);
  manifest.write(config.out);
  return 0;
}

int run_report(const RunConfig& config) {
  validate_config(config, {"truth", "predictions"});
  const PredictionsFile predictions =
      read_predictions_csv(config.predictions);
  ecgbench::wfdb::Vocabulary vocabulary;
  vocabulary.symbols = predictions.classes;

  const std::map<std::string, ecgbench::wfdb::LabelSet> reference =
      ecgbench::wfdb::parse_reference_csv(config.truth, vocabulary);
  if (reference.size() != predictions.record_ids.size()) {
    throw DataError("prediction/label counts differ (" +
                    std::to_string(predictions.record_ids.size()) + " vs " +
                    std::to_string(reference.size()) + ")");
  }
  evalkit::LabelSets truth;
  for (const std::string& id : predictions.record_ids) {
    const auto it = reference.find(id);
    if (it == reference.end()) {
      throw DataError("record " + id + " has no entry in " + config.truth);
    }
    truth.push_back(it->second.labels);
  }

  const evalkit::ClassificationReport report = evalkit::classification_report(
      truth, predictions.sets, vocabulary.symbols);

  RunManifest manifest("report", config);
  const fs::path text_path = fs::path(config.out) / "report.txt";
  write_text_file(text_path, evalkit::render_report(report));
  manifest.add_artifact(text_path);

  ordered_json doc;
  auto row_json = [](const evalkit::ClassMetrics& row) {
    ordered_json entry;
    entry["precision"] = row.precision;
    entry["recall"] = row.recall;
    entry["f1"] = row.f1;
    entry["support"] = row.support;
    return entry;
  };
  for (const evalkit::ClassMetrics& row : report.classes) {
    doc["classes"][row.label] = row_json(row);
  }
  doc["micro avg"] = row_json(report.micro);
  doc["macro avg"] = row_json(report.macro);
  doc["weighted avg"] = row_json(report.weighted);
  doc["samples avg"] = row_json(report.samples);

  if (!config.sources.empty()) {
    const std::vector<std::vector<std::string>> rows =
        ecgbench::read_csv(config.sources);
    if (rows.empty() || rows.front().size() < 2 ||
        rows.front()[0] != "record_id" || rows.front()[1] != "source") {
      throw DataError("not a sources CSV: " + config.sources);
    }
    const bool has_length =
        rows.front().size() >= 3 && rows.front()[2] == "length_s";
    std::map<std::string, std::pair<std::string, double>> by_id;
    std::vector<std::string> known;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() < rows.front().size()) {
        throw DataError("ragged sources CSV row " + std::to_string(r + 1));
      }
      const std::string& source = rows[r][1];
      by_id[rows[r][0]] = {
          source, has_length ? ecgbench::parse_double(rows[r][2]) : 0.0};
      if (std::find(known.begin(), known.end(), source) == known.end()) {
        known.push_back(source);
      }
    }
    std::vector<std::string> tags;
    std::vector<double> lengths;
    for (const std::string& id : predictions.record_ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw DataError("record " + id + " has no entry in " +
                        config.sources);
      }
      tags.push_back(it->second.first);
      lengths.push_back(it->second.second);
    }
    std::vector<std::string> warnings;
    const std::vector<evalkit::SourceBreakdown> breakdown =
        evalkit::f1_by_group(truth, predictions.sets, tags, known,
                             has_length ? &lengths : nullptr, &warnings);
    for (const std::string& warning : warnings) {
      manifest.add_warning(warning);
    }
    const std::string display_name =
        config.name.empty() ? "model" : config.name;
    const fs::path sources_path = fs::path(config.out) / "sources.txt";
    write_text_file(sources_path, evalkit::render_source_table(
                                      {{display_name, breakdown}}));
    manifest.add_artifact(sources_path);
    for (const evalkit::SourceBreakdown& row : breakdown) {
      ordered_json entry;
      entry["records"] = row.records;
      entry["mean_length_s"] = row.mean_length_s;
      entry["micro_f1"] = row.micro_f1;
      doc["sources"][row.source] = entry;
    }
  }

  const fs::path json_path = fs::path(config.out) / "report.json";
  write_text_file(json_path, doc.dump(2) + "\n");
  manifest.add_artifact(json_path);
  manifest.write(config.out);
  return 0;
}

}  // namespace ecgtool
