#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgbench/errors.hpp"
#include "ecgbench/util/toml.hpp"

namespace {

using ecgtool::RunConfig;

// Remembers which configuration fields arrived as command-line flags so the
// config-file merge can honor flags > config > defaults.
struct FlagBook {
  std::vector<std::pair<std::string, CLI::Option*>> entries;

  void add(const std::string& key, CLI::Option* option) {
    entries.emplace_back(key, option);
  }
  bool given(const std::string& key) const {
    for (const auto& [k, option] : entries) {
      if (k == key && option->count() > 0) return true;
    }
    return false;
  }
};

struct Command {
  CLI::App* app = nullptr;
  std::string default_pipeline;
  std::function<int(const RunConfig&)> run;
};

void add_common(CLI::App* sub, RunConfig& config, std::string& config_path,
                FlagBook& book) {
  sub->add_option("--config", config_path, "TOML configuration file");
  book.add("data", sub->add_option("--data", config.data,
                                   "record directory or one .hea file"));
  book.add("out", sub->add_option("--out", config.out, "output directory"));
  book.add("seed", sub->add_option("--seed", config.seed, "master RNG seed"));
  book.add("jobs",
           sub->add_option("--jobs", config.jobs,
                           "worker threads (default: ECGBENCH_JOBS or 1)"));
}

void add_conditioning(CLI::App* sub, RunConfig& config, FlagBook& book) {
  book.add("resample_hz", sub->add_option("--resample-hz", config.resample_hz,
                                          "target sampling rate"));
  book.add("low_hz",
           sub->add_option("--low-hz", config.low_hz, "band-pass low edge"));
  book.add("high_hz", sub->add_option("--high-hz", config.high_hz,
                                      "band-pass high edge"));
}

void add_label_sources(CLI::App* sub, RunConfig& config, FlagBook& book) {
  book.add("labels", sub->add_option("--labels", config.labels,
                                     "reference CSV (record,symbol rows)"));
  book.add("mapping",
           sub->add_option("--mapping", config.mapping,
                           "diagnosis-code mapping CSV (code,symbol)"));
  book.add("manifest", sub->add_option("--manifest", config.manifest,
                                       "dataset manifest JSON"));
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  std::string config_path;
  FlagBook book;

  CLI::App app{"ECG classification toolkit: signal conditioning, R-peak "
               "detection, Poincare imaging, feature extraction, 1D networks "
               "with class activation maps, boosted trees, and evaluation "
               "reports."};
  app.require_subcommand(1);
  std::vector<Command> commands;

  {
    CLI::App* sub = app.add_subcommand(
        "ingest", "Condition records into single-lead WFDB files");
    add_common(sub, config, config_path, book);
    add_conditioning(sub, config, book);
    add_label_sources(sub, config, book);
    book.add("split_ratios",
             sub->add_option("--split-ratios", config.split_ratios,
                             "train,val,test ratios (writes a dataset "
                             "manifest; needs a label source)")
                 ->delimiter(','));
    commands.push_back({sub, "raw-1d", ecgtool::run_ingest});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "detect", "Locate R-peaks and beat-to-beat intervals");
    add_common(sub, config, config_path, book);
    add_conditioning(sub, config, book);
    commands.push_back({sub, "poincare-image", ecgtool::run_detect});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "poincare", "Render interval return maps as PGM and PNG images");
    add_common(sub, config, config_path, book);
    add_conditioning(sub, config, book);
    commands.push_back({sub, "poincare-image", ecgtool::run_poincare});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "features", "Extract the time-series feature matrix");
    add_common(sub, config, config_path, book);
    book.add("spec", sub->add_option("--spec", config.spec,
                                     "feature-grid TOML (default grid when "
                                     "omitted)"));
    book.add("all_leads", sub->add_flag("--all-leads", config.all_leads,
                                        "extract from every lead, not just "
                                        "the analysis lead"));
    commands.push_back({sub, "features-boost", ecgtool::run_features});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "train", "Fit a 1D network on windowed records");
    add_common(sub, config, config_path, book);
    add_conditioning(sub, config, book);
    add_label_sources(sub, config, book);
    book.add("model", sub->add_option("--model", config.model,
                                      "cnn1d or resnet1d"));
    book.add("window",
             sub->add_option("--window", config.window, "input samples"));
    book.add("train.epochs",
             sub->add_option("--epochs", config.epochs, "training epochs"));
    book.add("train.batch_size", sub->add_option("--batch-size",
                                                 config.batch_size,
                                                 "minibatch size"));
    book.add("train.learning_rate",
             sub->add_option("--learning-rate", config.learning_rate,
                             "SGD learning rate"));
    book.add("train.momentum", sub->add_option("--momentum", config.momentum,
                                               "SGD momentum"));
    book.add("train.stop_accuracy",
             sub->add_option("--stop-accuracy", config.stop_accuracy,
                             "stop when train exact-match reaches this"));
    book.add("train.blocks",
             sub->add_option("--blocks", config.blocks,
                             "network depth in blocks (0 = full)"));
    book.add("threshold", sub->add_option("--threshold", config.threshold,
                                          "per-class decision cut"));
    commands.push_back({sub, "raw-1d", ecgtool::run_train});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "infer", "Predict class probabilities with a trained network");
    add_common(sub, config, config_path, book);
    book.add("model_file", sub->add_option("--model-file", config.model_file,
                                           "serialized network (.ecgn)"));
    book.add("threshold", sub->add_option("--threshold", config.threshold,
                                          "per-class decision cut"));
    commands.push_back({sub, "raw-1d", ecgtool::run_infer});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "gradcam", "Class activation map for one record and class");
    add_common(sub, config, config_path, book);
    book.add("model_file", sub->add_option("--model-file", config.model_file,
                                           "serialized network (.ecgn)"));
    book.add("class", sub->add_option("--class", config.class_symbol,
                                      "target class symbol"));
    book.add("record", sub->add_option("--record", config.record_id,
                                       "record id when --data is a "
                                       "directory"));
    commands.push_back({sub, "raw-1d", ecgtool::run_gradcam});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "bench", "Measure per-record processing and prediction latency");
    add_common(sub, config, config_path, book);
    add_conditioning(sub, config, book);
    book.add("model_file", sub->add_option("--model-file", config.model_file,
                                           "model to benchmark"));
    book.add("pipeline", sub->add_option("--pipeline", config.pipeline,
                                         "raw-1d or features-boost"));
    book.add("spec", sub->add_option("--spec", config.spec,
                                     "feature-grid TOML for features-boost"));
    book.add("reps", sub->add_option("--reps", config.reps,
                                     "repetitions (first is warm-up)"));
    book.add("name", sub->add_option("--name", config.name,
                                     "display name in the timing table"));
    book.add("duration_h", sub->add_option("--duration-h", config.duration_h,
                                           "workload duration for the energy "
                                           "estimate"));
    book.add("factor", sub->add_option("--factor", config.factor,
                                       "emission factor in grams CO2 per Wh"));
    book.add("devices", sub->add_option("--device", config.devices,
                                        "name=watts[@utilization], "
                                        "repeatable"));
    commands.push_back({sub, "raw-1d", ecgtool::run_bench});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "boost-train", "Fit one-vs-rest boosted trees on a feature matrix");
    add_common(sub, config, config_path, book);
    book.add("data", sub->add_option("--features", config.data,
                                     "feature matrix CSV (same as --data)"));
    add_label_sources(sub, config, book);
    book.add("search",
             sub->add_option("--search", config.search_trials,
                             "random hyperparameter search trials scored on "
                             "the early-stop holdout (0 = off)"));
    book.add("boost.max_depth", sub->add_option("--max-depth",
                                                config.boost.max_depth,
                                                "tree depth limit"));
    book.add("boost.eta",
             sub->add_option("--eta", config.boost.eta, "shrinkage"));
    book.add("boost.gamma", sub->add_option("--gamma", config.boost.gamma,
                                            "split gain threshold"));
    book.add("boost.lambda", sub->add_option("--lambda",
                                             config.boost.reg_lambda,
                                             "L2 regularization"));
    book.add("boost.alpha", sub->add_option("--alpha", config.boost.reg_alpha,
                                            "L1 regularization"));
    book.add("boost.scale_pos_weight",
             sub->add_option("--scale-pos-weight",
                             config.boost.scale_pos_weight,
                             "positive-example weight"));
    book.add("boost.rounds", sub->add_option("--rounds", config.boost.rounds,
                                             "boosting rounds per class"));
    book.add("boost.patience",
             sub->add_option("--patience", config.boost.patience,
                             "early-stop patience (holdout rounds)"));
    book.add("boost.holdout_stride",
             sub->add_option("--holdout-stride", config.boost.holdout_stride,
                             "every n-th record held out (0 disables)"));
    book.add("boost.fill_value",
             sub->add_option("--fill-value", config.boost.fill_value,
                             "imputation fill for missing features"));
    commands.push_back({sub, "features-boost", ecgtool::run_boost_train});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "boost-predict", "Predict with a boosted-tree model");
    add_common(sub, config, config_path, book);
    book.add("data", sub->add_option("--features", config.data,
                                     "feature matrix CSV (same as --data)"));
    book.add("model_file", sub->add_option("--model-file", config.model_file,
                                           "boosted model JSON"));
    book.add("threshold", sub->add_option("--threshold", config.threshold,
                                          "per-class decision cut"));
    commands.push_back({sub, "features-boost", ecgtool::run_boost_predict});
  }
  {
    CLI::App* sub = app.add_subcommand(
        "report", "Multi-label classification report from predictions");
    add_common(sub, config, config_path, book);
    book.add("truth", sub->add_option("--truth", config.truth,
                                      "reference CSV (record,symbol rows)"));
    book.add("predictions",
             sub->add_option("--predictions", config.predictions,
                             "predictions CSV from infer/boost-predict"));
    book.add("sources", sub->add_option("--sources", config.sources,
                                        "record_id,source[,length_s] CSV for "
                                        "the per-source table"));
    book.add("name", sub->add_option("--name", config.name,
                                     "display name in the source table"));
    commands.push_back({sub, "features-boost", ecgtool::run_report});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  const auto flag_given = [&book](const std::string& key) {
    return book.given(key);
  };
  try {
    for (const Command& command : commands) {
      if (!command.app->parsed()) continue;
      if (!flag_given("pipeline")) config.pipeline = command.default_pipeline;
      if (!config_path.empty()) {
        ecgtool::merge_config_file(
            config, ecgbench::parse_toml_file(config_path), flag_given);
      }
      ecgtool::finalize_config(config, flag_given);
      return command.run(config);
    }
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const ecgbench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
