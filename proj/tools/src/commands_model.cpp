#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "ecgbench/errors.hpp"
#include "ecgbench/evalkit/energy.hpp"
#include "ecgbench/evalkit/timing.hpp"
#include "ecgbench/gbt/model_io.hpp"
#include "ecgbench/neural/gradcam.hpp"
#include "ecgbench/neural/model.hpp"
#include "ecgbench/neural/serialize.hpp"
#include "ecgbench/neural/train.hpp"
#include "ecgbench/tsfeat/features.hpp"
#include "ecgbench/tsfeat/matrix.hpp"
#include "ecgbench/tsfeat/spec.hpp"
#include "ecgbench/util/csv.hpp"
#include "ecgbench/wfdb/manifest.hpp"

namespace ecgtool {

using ecgbench::ConfigError;
using ecgbench::DataError;
using ecgbench::IndexError;
using ecgbench::Signal;
namespace neural = ecgbench::neural;

namespace {

// Sidecar describing how a serialized network expects its input prepared.
struct ModelMeta {
  std::string architecture;
  std::vector<std::string> classes;
  std::size_t window = 0;
  long long resample_hz = 300;
  double low_hz = 3.0;
  double high_hz = 45.0;
  std::size_t blocks = 0;
};

fs::path meta_path_for(const fs::path& model_file) {
  return fs::path(model_file.string() + ".meta.json");
}

void write_meta(const ModelMeta& meta, const fs::path& path) {
  ordered_json doc;
  doc["architecture"] = meta.architecture;
  doc["classes"] = meta.classes;
  doc["window"] = meta.window;
  doc["resample_hz"] = meta.resample_hz;
  doc["low_hz"] = meta.low_hz;
  doc["high_hz"] = meta.high_hz;
  doc["blocks"] = meta.blocks;
  write_text_file(path, doc.dump(2) + "\n");
}

ModelMeta read_meta(const fs::path& model_file) {
  const fs::path path = meta_path_for(model_file);
  std::ifstream in(path);
  if (!in) {
    throw DataError("missing model metadata " + path.string());
  }
  ordered_json doc;
  try {
    in >> doc;
    ModelMeta meta;
    meta.architecture = doc.at("architecture").get<std::string>();
    meta.classes = doc.at("classes").get<std::vector<std::string>>();
    meta.window = doc.at("window").get<std::size_t>();
    meta.resample_hz = doc.at("resample_hz").get<long long>();
    meta.low_hz = doc.at("low_hz").get<double>();
    meta.high_hz = doc.at("high_hz").get<double>();
    meta.blocks = doc.at("blocks").get<std::size_t>();
    return meta;
  } catch (const nlohmann::json::exception& error) {
    throw ecgbench::ParseError("bad model metadata " + path.string() + ": " +
                               error.what());
  }
}

// Loads, conditions, and windows every record into one (N, 1, window) batch.
struct WindowedBatch {
  std::vector<std::string> ids;
  neural::Tensor examples;
};

WindowedBatch load_windows(const std::vector<fs::path>& headers,
                           long long resample_hz, double low_hz,
                           double high_hz, std::size_t window,
                           long long jobs) {
  WindowedBatch batch;
  batch.ids.resize(headers.size());
  batch.examples = neural::Tensor::zeros(headers.size(), 1, window);
  parallel_for(headers.size(), jobs, [&](std::size_t i) {
    const ecgbench::wfdb::SignalRecord record =
        ecgbench::wfdb::load_record(headers[i]);
    batch.ids[i] = record.header.record_id;
    const Signal conditioned =
        condition_signal(ecgbench::wfdb::analysis_lead(record), resample_hz,
                         low_hz, high_hz);
    const std::vector<double> samples = window_samples(conditioned, window);
    std::memcpy(batch.examples.row(i, 0), samples.data(),
                window * sizeof(double));
  });
  return batch;
}

neural::Model build_network(const std::string& architecture,
                            std::size_t num_classes, std::size_t window,
                            std::size_t blocks) {
  if (architecture == "cnn1d") {
    return neural::build_cnn1d(num_classes, window, 1,
                               blocks == 0 ? 12 : blocks);
  }
  if (architecture == "resnet1d") {
    return neural::build_resnet1d(num_classes, 1, blocks == 0 ? 4 : blocks);
  }
  throw ConfigError("no network named '" + architecture + "'");
}

std::vector<std::vector<double>> sigmoid_rows(const neural::Tensor& logits) {
  std::vector<std::vector<double>> probs(logits.batch);
  for (std::size_t b = 0; b < logits.batch; ++b) {
    probs[b].resize(logits.channels);
    for (std::size_t c = 0; c < logits.channels; ++c) {
      probs[b][c] = 1.0 / (1.0 + std::exp(-logits.at(b, c, 0)));
    }
  }
  return probs;
}

std::vector<std::vector<std::string>> threshold_sets(
    const std::vector<std::vector<double>>& probs,
    const std::vector<std::string>& classes, double threshold) {
  std::vector<std::vector<std::string>> sets(probs.size());
  for (std::size_t r = 0; r < probs.size(); ++r) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (probs[r][c] >= threshold) sets[r].push_back(classes[c]);
    }
  }
  return sets;
}

// Signal trace over a heatmap band: weights render as red opacity behind a
// black polyline of the samples.
std::string heatmap_svg(const std::vector<double>& samples,
                        const std::vector<double>& weights,
                        const std::string& title) {
  constexpr int kWidth = 1200;
  constexpr int kHeight = 300;
  constexpr int kBuckets = 300;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  svg << "<title>" << title << "</title>\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  const double bucket_width = static_cast<double>(kWidth) / kBuckets;
  for (int bucket = 0; bucket < kBuckets; ++bucket) {
    const std::size_t begin = bucket * weights.size() / kBuckets;
    const std::size_t end = (bucket + 1) * weights.size() / kBuckets;
    double peak = 0.0;
    for (std::size_t i = begin; i < end && i < weights.size(); ++i) {
      peak = std::max(peak, weights[i]);
    }
    if (peak <= 0.0) continue;
    char rect[160];
    std::snprintf(rect, sizeof(rect),
                  "<rect x=\"%.2f\" y=\"0\" width=\"%.2f\" height=\"%d\" "
                  "fill=\"red\" fill-opacity=\"%.3f\"/>\n",
                  bucket * bucket_width, bucket_width, kHeight, 0.8 * peak);
    svg << rect;
  }

  double lo = samples.empty() ? 0.0 : samples.front();
  double hi = lo;
  for (double v : samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo > 0.0 ? hi - lo : 1.0;
  svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" "
         "points=\"";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x =
        static_cast<double>(i) * kWidth /
        static_cast<double>(samples.size() > 1 ? samples.size() - 1 : 1);
    const double y = 20.0 + (1.0 - (samples[i] - lo) / span) * 260.0;
    char point[64];
    std::snprintf(point, sizeof(point), "%.2f,%.2f ", x, y);
    svg << point;
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

ecgbench::evalkit::DevicePower parse_device(const std::string& spec) {
  const std::size_t equals = spec.find('=');
  if (equals == std::string::npos || equals == 0) {
    throw ConfigError("device spec must be name=watts[@utilization]: " +
                      spec);
  }
  ecgbench::evalkit::DevicePower device;
  device.name = spec.substr(0, equals);
  std::string rest = spec.substr(equals + 1);
  const std::size_t at = rest.find('@');
  if (at != std::string::npos) {
    device.utilization = ecgbench::parse_double(rest.substr(at + 1));
    rest = rest.substr(0, at);
  }
  device.watts = ecgbench::parse_double(rest);
  return device;
}

}  // namespace

int run_train(const RunConfig& config) {
  validate_config(config, {"data"});
  if (config.pipeline != "raw-1d") {
    throw ConfigError("train drives the raw-1d pipeline; '" +
                      config.pipeline + "' models are fit elsewhere");
  }

  std::vector<fs::path> headers = list_records(config.data);
  RunConfig effective = config;
  if (!config.manifest.empty()) {
    // Keep only the manifest's training split.
    const ecgbench::wfdb::DatasetManifest dataset =
        ecgbench::wfdb::load_manifest(config.manifest);
    std::vector<fs::path> kept;
    for (const fs::path& header : headers) {
      const std::string id = header.stem().string();
      for (const ecgbench::wfdb::ManifestEntry& entry : dataset.entries) {
        if (entry.labels.record_id == id &&
            entry.split == ecgbench::wfdb::Split::train) {
          kept.push_back(header);
          break;
        }
      }
    }
    if (kept.empty()) {
      throw DataError("no training-split records found under " + config.data);
    }
    headers = std::move(kept);
  }

  const ecgbench::wfdb::Vocabulary vocabulary = active_vocabulary(config);
  const WindowedBatch batch =
      load_windows(headers, config.resample_hz, config.low_hz, config.high_hz,
                   config.window, config.jobs);
  const std::vector<std::vector<std::string>> truth =
      load_truth(effective, batch.ids, vocabulary);

  neural::Tensor targets = neural::Tensor::zeros(
      batch.ids.size(), vocabulary.symbols.size(), 1);
  for (std::size_t r = 0; r < truth.size(); ++r) {
    for (const std::string& symbol : truth[r]) {
      targets.at(r, vocabulary.index_of(symbol), 0) = 1.0;
    }
  }

  neural::Model model = build_network(config.model, vocabulary.symbols.size(),
                                      config.window, config.blocks);
  ecgbench::Rng init_rng = ecgbench::Rng::substream(config.seed, "init");
  neural::initialize_parameters(model, init_rng);

  neural::TrainConfig train_config;
  train_config.epochs = config.epochs;
  train_config.batch_size = config.batch_size;
  train_config.learning_rate = config.learning_rate;
  train_config.momentum = config.momentum;
  train_config.seed = config.seed;
  train_config.stop_train_accuracy = config.stop_accuracy;
  train_config.threshold = config.threshold;
  const neural::TrainLog log =
      neural::train_model(model, batch.examples, targets, train_config);

  RunManifest manifest("train", config);
  const fs::path model_path = fs::path(config.out) / "model.ecgn";
  fs::create_directories(config.out);
  neural::save_model(model, model_path);
  manifest.add_artifact(model_path);

  ModelMeta meta;
  meta.architecture = config.model;
  meta.classes = vocabulary.symbols;
  meta.window = config.window;
  meta.resample_hz = config.resample_hz;
  meta.low_hz = config.low_hz;
  meta.high_hz = config.high_hz;
  meta.blocks = config.blocks;
  write_meta(meta, meta_path_for(model_path));
  manifest.add_artifact(meta_path_for(model_path));

  ordered_json log_doc;
  log_doc["epochs_run"] = log.epochs_run;
  log_doc["epoch_loss"] = log.epoch_loss;
  log_doc["epoch_accuracy"] = log.epoch_accuracy;
  log_doc["train_exact_match"] = neural::exact_match_accuracy(
      model, batch.examples, targets, config.threshold);
  const fs::path log_path = fs::path(config.out) / "train_log.json";
  write_text_file(log_path, log_doc.dump(2) + "\n");
  manifest.add_artifact(log_path);

  manifest.write(config.out);
  return 0;
}

int run_infer(const RunConfig& config) {
  validate_config(config, {"data", "model_file"});
  neural::Model model = neural::load_model(config.model_file);
  const ModelMeta meta = read_meta(config.model_file);

  const std::vector<fs::path> headers = list_records(config.data);
  const WindowedBatch batch = load_windows(headers, meta.resample_hz,
                                           meta.low_hz, meta.high_hz,
                                           meta.window, config.jobs);
  const neural::Tensor logits = neural::predict_logits(model, batch.examples);
  if (logits.channels != meta.classes.size()) {
    throw DataError("model outputs " + std::to_string(logits.channels) +
                    " classes but metadata lists " +
                    std::to_string(meta.classes.size()));
  }
  const std::vector<std::vector<double>> probs = sigmoid_rows(logits);
  const std::vector<std::vector<std::string>> sets =
      threshold_sets(probs, meta.classes, config.threshold);

  RunManifest manifest("infer", config);
  const fs::path predictions_path = fs::path(config.out) / "predictions.csv";
  write_predictions_csv(predictions_path, batch.ids, meta.classes, probs,
                        sets);
  manifest.add_artifact(predictions_path);
  manifest.write(config.out);
  return 0;
}

int run_gradcam(const RunConfig& config) {
  validate_config(config, {"data", "model_file", "class"});
  neural::Model model = neural::load_model(config.model_file);
  const ModelMeta meta = read_meta(config.model_file);

  std::vector<fs::path> headers = list_records(config.data);
  if (!config.record_id.empty()) {
    std::vector<fs::path> matched;
    for (const fs::path& header : headers) {
      if (header.stem().string() == config.record_id) matched.push_back(header);
    }
    if (matched.empty()) {
      throw DataError("record " + config.record_id + " not found under " +
                      config.data);
    }
    headers = std::move(matched);
  } else if (headers.size() != 1) {
    throw ConfigError("pick one record with --record (found " +
                      std::to_string(headers.size()) + ")");
  }

  const auto symbol_it = std::find(meta.classes.begin(), meta.classes.end(),
                                   config.class_symbol);
  if (symbol_it == meta.classes.end()) {
    throw IndexError("class '" + config.class_symbol +
                     "' is not one of the model's classes");
  }
  const std::size_t class_index =
      static_cast<std::size_t>(symbol_it - meta.classes.begin());

  const WindowedBatch batch = load_windows(headers, meta.resample_hz,
                                           meta.low_hz, meta.high_hz,
                                           meta.window, 1);
  const std::vector<double> weights =
      neural::gradcam1d(model, batch.examples, class_index);

  const std::string& id = batch.ids.front();
  const fs::path cam_dir = fs::path(config.out) / "gradcam";
  std::ostringstream csv;
  csv << "sample,weight\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    csv << i << ',' << ecgbench::format_double(weights[i]) << '\n';
  }
  const fs::path csv_path =
      cam_dir / (id + "_" + config.class_symbol + ".csv");
  write_text_file(csv_path, csv.str());

  std::vector<double> samples(batch.examples.row(0, 0),
                              batch.examples.row(0, 0) + meta.window);
  const fs::path svg_path =
      cam_dir / (id + "_" + config.class_symbol + ".svg");
  write_text_file(svg_path,
                  heatmap_svg(samples, weights,
                              id + " class " + config.class_symbol));

  RunManifest manifest("gradcam", config);
  manifest.add_artifact(csv_path);
  manifest.add_artifact(svg_path);
  manifest.write(config.out);
  return 0;
}

int run_bench(const RunConfig& config) {
  validate_config(config, {"data", "model_file"});
  const std::vector<fs::path> headers = list_records(config.data);

  // Preload raw records so disk reads stay outside the timed stages.
  std::vector<ecgbench::wfdb::SignalRecord> records(headers.size());
  parallel_for(headers.size(), config.jobs, [&](std::size_t i) {
    records[i] = ecgbench::wfdb::load_record(headers[i]);
  });

  ecgbench::evalkit::TimingReport timing;
  std::string display_name = config.name;

  if (config.pipeline == "features-boost") {
    const ecgbench::gbt::BoostedModel model =
        ecgbench::gbt::load_boosted_model(config.model_file);
    if (display_name.empty()) display_name = "gbt";
    const std::vector<ecgbench::tsfeat::FeatureSpec> specs =
        config.spec.empty() ? ecgbench::tsfeat::default_specs()
                            : ecgbench::tsfeat::specs_from_toml(config.spec);

    std::vector<ecgbench::tsfeat::FeatureMatrix> staged(records.size());
    timing = ecgbench::evalkit::time_pipeline(
        [&](std::size_t i) {
          const Signal conditioned = condition_signal(
              ecgbench::wfdb::analysis_lead(records[i]), config.resample_hz,
              config.low_hz, config.high_hz);
          const ecgbench::tsfeat::FeatureVector vector =
              ecgbench::tsfeat::extract_all({conditioned}, specs);
          staged[i] = ecgbench::tsfeat::build_matrix(
              {records[i].header.record_id}, {vector});
          for (std::vector<double>& row : staged[i].rows) {
            for (double& cell : row) {
              if (std::isnan(cell)) cell = model.config.fill_value;
            }
          }
        },
        [&](std::size_t i) {
          (void)ecgbench::gbt::predict_proba(model, staged[i]);
        },
        records.size(), config.reps);
  } else {
    neural::Model model = neural::load_model(config.model_file);
    const ModelMeta meta = read_meta(config.model_file);
    if (display_name.empty()) display_name = meta.architecture;

    neural::Tensor scratch = neural::Tensor::zeros(1, 1, meta.window);
    timing = ecgbench::evalkit::time_pipeline(
        [&](std::size_t i) {
          const Signal conditioned = condition_signal(
              ecgbench::wfdb::analysis_lead(records[i]), meta.resample_hz,
              meta.low_hz, meta.high_hz);
          const std::vector<double> samples =
              window_samples(conditioned, meta.window);
          std::memcpy(scratch.row(0, 0), samples.data(),
                      meta.window * sizeof(double));
        },
        [&](std::size_t) { (void)neural::predict_logits(model, scratch); },
        records.size(), config.reps);
  }

  RunManifest manifest("bench", config);
  ordered_json doc;
  doc["model"] = display_name;
  doc["records"] = timing.records;
  doc["repetitions"] = timing.repetitions;
  doc["processing_ms"] = timing.processing_ms;
  doc["prediction_ms"] = timing.prediction_ms;
  doc["total_ms"] = timing.total_ms;

  const std::string table = ecgbench::evalkit::render_timing_table(
      {{display_name, timing}});
  const fs::path table_path = fs::path(config.out) / "timing.txt";
  write_text_file(table_path, table);
  manifest.add_artifact(table_path);

  if (!config.devices.empty()) {
    std::vector<ecgbench::evalkit::DevicePower> devices;
    for (const std::string& spec : config.devices) {
      devices.push_back(parse_device(spec));
    }
    const ecgbench::evalkit::EnergyReport energy =
        ecgbench::evalkit::estimate_energy(config.duration_h, devices,
                                           config.factor);
    doc["energy_wh"] = energy.energy_wh;
    doc["co2_g"] = energy.co2_g;
    const fs::path energy_path = fs::path(config.out) / "energy.txt";
    write_text_file(energy_path, ecgbench::evalkit::render_energy(energy));
    manifest.add_artifact(energy_path);
  }

  const fs::path bench_path = fs::path(config.out) / "bench.json";
  write_text_file(bench_path, doc.dump(2) + "\n");
  manifest.add_artifact(bench_path);
  manifest.write(config.out);
  return 0;
}

}  // namespace ecgtool
