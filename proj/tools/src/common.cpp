#include "common.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ecgbench/dsp.hpp"
#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"
#include "ecgbench/wfdb/manifest.hpp"

namespace ecgtool {

using ecgbench::ConfigError;
using ecgbench::DataError;
using ecgbench::TomlValue;

namespace {

// One field of the flags > config > defaults cascade.
template <typename Setter>
void cascade(RunConfig& config, const TomlValue& document,
             const std::function<bool(const std::string&)>& flag_given,
             const std::string& key, Setter&& set_from_toml) {
  if (flag_given(key)) {
    config.origins[key] = "flag";
    return;
  }
  if (const TomlValue* value = document.find_path(key)) {
    set_from_toml(*value);
    config.origins[key] = "config";
  }
}

std::vector<std::string> split_on(const std::string& text, char separator) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == separator) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

void merge_config_file(
    RunConfig& config, const TomlValue& document,
    const std::function<bool(const std::string&)>& flag_given) {
  auto str = [&](const std::string& key, std::string& field) {
    cascade(config, document, flag_given, key,
            [&field](const TomlValue& v) { field = v.as_string(); });
  };
  auto integer = [&](const std::string& key, auto& field) {
    cascade(config, document, flag_given, key, [&field](const TomlValue& v) {
      field = static_cast<std::decay_t<decltype(field)>>(v.as_int());
    });
  };
  auto number = [&](const std::string& key, double& field) {
    cascade(config, document, flag_given, key,
            [&field](const TomlValue& v) { field = v.as_double(); });
  };
  auto boolean = [&](const std::string& key, bool& field) {
    cascade(config, document, flag_given, key,
            [&field](const TomlValue& v) { field = v.as_bool(); });
  };

  str("data", config.data);
  str("out", config.out);
  str("labels", config.labels);
  str("mapping", config.mapping);
  str("manifest", config.manifest);
  str("spec", config.spec);
  str("model_file", config.model_file);
  str("pipeline", config.pipeline);
  str("model", config.model);
  integer("seed", config.seed);
  integer("window", config.window);
  integer("resample_hz", config.resample_hz);
  number("low_hz", config.low_hz);
  number("high_hz", config.high_hz);
  integer("jobs", config.jobs);
  number("threshold", config.threshold);
  boolean("all_leads", config.all_leads);
  cascade(config, document, flag_given, "split_ratios",
          [&config](const TomlValue& v) {
            config.split_ratios.clear();
            for (const TomlValue& item : v.as_array()) {
              config.split_ratios.push_back(item.as_double());
            }
          });
  integer("train.epochs", config.epochs);
  integer("train.batch_size", config.batch_size);
  number("train.learning_rate", config.learning_rate);
  number("train.momentum", config.momentum);
  number("train.stop_accuracy", config.stop_accuracy);
  integer("train.blocks", config.blocks);
  integer("boost.max_depth", config.boost.max_depth);
  number("boost.eta", config.boost.eta);
  number("boost.gamma", config.boost.gamma);
  number("boost.lambda", config.boost.reg_lambda);
  number("boost.alpha", config.boost.reg_alpha);
  number("boost.scale_pos_weight", config.boost.scale_pos_weight);
  integer("boost.rounds", config.boost.rounds);
  integer("boost.patience", config.boost.patience);
  integer("boost.holdout_stride", config.boost.holdout_stride);
  number("boost.fill_value", config.boost.fill_value);
  integer("search", config.search_trials);
  str("truth", config.truth);
  str("predictions", config.predictions);
  str("sources", config.sources);
  str("name", config.name);
  str("class", config.class_symbol);
  str("record", config.record_id);
  integer("reps", config.reps);
  number("duration_h", config.duration_h);
  number("factor", config.factor);
  cascade(config, document, flag_given, "devices",
          [&config](const TomlValue& v) {
            config.devices.clear();
            for (const TomlValue& item : v.as_array()) {
              config.devices.push_back(item.as_string());
            }
          });
}

void finalize_config(
    RunConfig& config,
    const std::function<bool(const std::string&)>& flag_given) {
  static const char* kKeys[] = {
      "data",        "out",          "labels",          "mapping",
      "manifest",    "spec",         "model_file",      "pipeline",
      "model",       "seed",         "window",          "resample_hz",
      "low_hz",      "high_hz",      "jobs",            "threshold",
      "all_leads",   "split_ratios", "train.epochs",    "train.batch_size",
      "train.learning_rate",         "train.momentum",
      "train.stop_accuracy",         "train.blocks",    "boost.max_depth",
      "boost.eta",   "boost.gamma",  "boost.lambda",    "boost.alpha",
      "boost.scale_pos_weight",      "boost.rounds",    "boost.patience",
      "boost.holdout_stride",        "boost.fill_value", "search",
      "truth",       "predictions",  "sources",         "name",
      "class",       "record",       "reps",            "duration_h",
      "factor",      "devices"};
  for (const char* key : kKeys) {
    if (flag_given(key)) {
      config.origins[key] = "flag";
    } else {
      config.origins.emplace(key, "default");
    }
  }

  if (config.origins["jobs"] == "default") {
    if (const char* env = std::getenv("ECGBENCH_JOBS")) {
      try {
        config.jobs = ecgbench::parse_int(env);
        config.origins["jobs"] = "env";
      } catch (const ecgbench::ParseError&) {
        throw ConfigError("ECGBENCH_JOBS is not an integer: " +
                          std::string(env));
      }
    }
  }

  if (config.model.empty()) {
    if (config.pipeline == "raw-1d") {
      config.model = "resnet1d";
    } else if (config.pipeline == "features-boost") {
      config.model = "gbt";
    } else {
      config.model = "none";
    }
  }
}

void validate_config(const RunConfig& config,
                     const std::vector<std::string>& required) {
  std::vector<std::string> failures;
  auto require = [&](const std::string& field, const std::string& value) {
    if (value.empty()) failures.push_back("missing required --" + field);
  };
  for (const std::string& field : required) {
    if (field == "data") require(field, config.data);
    if (field == "features") require(field, config.data);
    if (field == "model_file") require(field, config.model_file);
    if (field == "truth") require(field, config.truth);
    if (field == "predictions") require(field, config.predictions);
    if (field == "class") require(field, config.class_symbol);
  }

  const std::pair<const char*, const std::string*> paths[] = {
      {"data", &config.data},           {"labels", &config.labels},
      {"mapping", &config.mapping},     {"manifest", &config.manifest},
      {"spec", &config.spec},           {"model_file", &config.model_file},
      {"truth", &config.truth},         {"predictions", &config.predictions},
      {"sources", &config.sources}};
  for (const auto& [field, value] : paths) {
    if (!value->empty() && !fs::exists(*value)) {
      failures.push_back(std::string(field) + " path does not exist: " +
                         *value);
    }
  }

  if (config.pipeline != "poincare-image" && config.pipeline != "raw-1d" &&
      config.pipeline != "features-boost") {
    failures.push_back("unknown pipeline '" + config.pipeline + "'");
  }
  if (config.model != "cnn1d" && config.model != "resnet1d" &&
      config.model != "gbt" && config.model != "none") {
    failures.push_back("unknown model '" + config.model + "'");
  }
  const bool legal =
      (config.pipeline == "raw-1d" &&
       (config.model == "cnn1d" || config.model == "resnet1d")) ||
      (config.pipeline == "features-boost" && config.model == "gbt") ||
      (config.pipeline == "poincare-image" && config.model == "none");
  if (!legal) {
    failures.push_back("pipeline '" + config.pipeline +
                       "' cannot drive model '" + config.model + "'");
  }

  if (config.window < 2) failures.push_back("window must be >= 2 samples");
  if (config.resample_hz < 1) failures.push_back("resample_hz must be >= 1");
  if (config.low_hz <= 0.0 || config.low_hz >= config.high_hz) {
    failures.push_back("band edges need 0 < low_hz < high_hz");
  }
  if (config.threshold <= 0.0 || config.threshold >= 1.0) {
    failures.push_back("threshold must lie in (0, 1)");
  }
  if (config.jobs < 1) failures.push_back("jobs must be >= 1");
  if (config.factor <= 0.0) {
    failures.push_back("emission factor must be positive");
  }
  if (config.epochs < 1) failures.push_back("train.epochs must be >= 1");
  if (config.batch_size < 1) {
    failures.push_back("train.batch_size must be >= 1");
  }
  if (config.learning_rate <= 0.0) {
    failures.push_back("train.learning_rate must be positive");
  }
  if (config.momentum < 0.0 || config.momentum >= 1.0) {
    failures.push_back("train.momentum must lie in [0, 1)");
  }
  if (!config.split_ratios.empty()) {
    if (config.split_ratios.size() != 3) {
      failures.push_back("split_ratios needs exactly 3 values");
    } else {
      double sum = 0.0;
      for (double r : config.split_ratios) {
        if (r < 0.0) failures.push_back("split ratios must be >= 0");
        sum += r;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        failures.push_back("split ratios must sum to 1");
      }
    }
  }

  if (!failures.empty()) {
    std::string message = "invalid configuration:";
    for (const std::string& failure : failures) {
      message += "\n  - " + failure;
    }
    throw ConfigError(message);
  }
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json boost;
  boost["max_depth"] = config.boost.max_depth;
  boost["eta"] = config.boost.eta;
  boost["gamma"] = config.boost.gamma;
  boost["lambda"] = config.boost.reg_lambda;
  boost["alpha"] = config.boost.reg_alpha;
  boost["scale_pos_weight"] = config.boost.scale_pos_weight;
  boost["rounds"] = config.boost.rounds;
  boost["patience"] = config.boost.patience;
  boost["holdout_stride"] = config.boost.holdout_stride;
  boost["fill_value"] = config.boost.fill_value;

  ordered_json train;
  train["epochs"] = config.epochs;
  train["batch_size"] = config.batch_size;
  train["learning_rate"] = config.learning_rate;
  train["momentum"] = config.momentum;
  train["stop_accuracy"] = config.stop_accuracy;
  train["blocks"] = config.blocks;

  ordered_json doc;
  doc["data"] = config.data;
  doc["out"] = config.out;
  doc["labels"] = config.labels;
  doc["mapping"] = config.mapping;
  doc["manifest"] = config.manifest;
  doc["spec"] = config.spec;
  doc["model_file"] = config.model_file;
  doc["pipeline"] = config.pipeline;
  doc["model"] = config.model;
  doc["seed"] = config.seed;
  doc["window"] = config.window;
  doc["resample_hz"] = config.resample_hz;
  doc["low_hz"] = config.low_hz;
  doc["high_hz"] = config.high_hz;
  doc["jobs"] = config.jobs;
  doc["threshold"] = config.threshold;
  doc["all_leads"] = config.all_leads;
  doc["split_ratios"] = config.split_ratios;
  doc["train"] = train;
  doc["boost"] = boost;
  doc["search"] = config.search_trials;
  doc["truth"] = config.truth;
  doc["predictions"] = config.predictions;
  doc["sources"] = config.sources;
  doc["name"] = config.name;
  doc["class"] = config.class_symbol;
  doc["record"] = config.record_id;
  doc["reps"] = config.reps;
  doc["duration_h"] = config.duration_h;
  doc["factor"] = config.factor;
  doc["devices"] = config.devices;
  doc["provenance"] = config.origins;
  return doc;
}

// ---------------------------------------------------------------------------

RunManifest::RunManifest(std::string command, const RunConfig& config)
    : command_(std::move(command)), config_(config_to_json(config)) {}

void RunManifest::add_artifact(const fs::path& path) {
  artifacts_.emplace_back(path.generic_string(), file_crc32(path));
}

void RunManifest::add_warning(const std::string& message) {
  warnings_.push_back(message);
}

void RunManifest::add_failure(const std::string& record_id,
                              const std::string& message) {
  failures_.emplace_back(record_id, message);
}

fs::path RunManifest::write(const fs::path& out_dir) const {
  std::vector<std::pair<std::string, std::string>> artifacts = artifacts_;
  std::sort(artifacts.begin(), artifacts.end());

  ordered_json doc;
  doc["command"] = command_;
  doc["seed"] = config_["seed"];
  doc["config"] = config_;
  doc["artifacts"] = ordered_json::array();
  for (const auto& [path, crc] : artifacts) {
    ordered_json entry;
    entry["path"] = path;
    entry["crc32"] = crc;
    doc["artifacts"].push_back(entry);
  }
  doc["warnings"] = warnings_;
  doc["failures"] = ordered_json::array();
  for (const auto& [record, message] : failures_) {
    ordered_json entry;
    entry["record"] = record;
    entry["error"] = message;
    doc["failures"].push_back(entry);
  }

  const fs::path path = out_dir / (command_ + "-manifest.json");
  write_text_file(path, doc.dump(2) + "\n");
  return path;
}

std::string file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read artifact " + path.string());
  unsigned long crc = ::crc32(0UL, nullptr, 0);
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    crc = ::crc32(crc, reinterpret_cast<const unsigned char*>(buffer),
                  static_cast<unsigned int>(in.gcount()));
  }
  char hex[16];
  std::snprintf(hex, sizeof(hex), "%08lx", crc & 0xffffffffUL);
  return hex;
}

// ---------------------------------------------------------------------------

std::vector<fs::path> list_records(const fs::path& data) {
  std::vector<fs::path> headers;
  if (fs::is_regular_file(data)) {
    if (data.extension() != ".hea") {
      throw DataError("not a record header: " + data.string());
    }
    headers.push_back(data);
    return headers;
  }
  if (!fs::is_directory(data)) {
    throw DataError("no such record source: " + data.string());
  }
  for (const fs::directory_entry& entry : fs::directory_iterator(data)) {
    if (entry.is_regular_file() && entry.path().extension() == ".hea") {
      headers.push_back(entry.path());
    }
  }
  std::sort(headers.begin(), headers.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.stem().string() < b.stem().string();
            });
  if (headers.empty()) {
    throw DataError("no .hea records under " + data.string());
  }
  return headers;
}

void parallel_for(std::size_t n, long long jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(n, jobs < 1 ? 1 : static_cast<std::size_t>(jobs));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------

ecgbench::Signal condition_signal(const ecgbench::Signal& lead,
                                  long long target_hz, double low_hz,
                                  double high_hz) {
  const ecgbench::Signal* source = &lead;
  ecgbench::Signal resampled;
  if (lead.sampling_rate_hz != target_hz) {
    resampled =
        ecgbench::dsp::resample_linear(lead, static_cast<int>(target_hz));
    source = &resampled;
  }
  return ecgbench::dsp::bandpass_filter(*source, low_hz, high_hz);
}

std::vector<double> window_samples(const ecgbench::Signal& conditioned,
                                   std::size_t window) {
  const ecgbench::Signal scaled = ecgbench::dsp::standardize(conditioned);
  return ecgbench::dsp::fix_length(scaled, window).samples;
}

ecgbench::wfdb::Vocabulary active_vocabulary(const RunConfig& config) {
  if (!config.mapping.empty()) {
    return ecgbench::wfdb::CodeMapping::from_csv(config.mapping).vocabulary();
  }
  return ecgbench::wfdb::rhythm2017_vocabulary();
}

std::vector<std::vector<std::string>> load_truth(
    const RunConfig& config, const std::vector<std::string>& record_ids,
    const ecgbench::wfdb::Vocabulary& vocabulary) {
  std::vector<std::vector<std::string>> truth;
  truth.reserve(record_ids.size());

  if (!config.labels.empty()) {
    const std::map<std::string, ecgbench::wfdb::LabelSet> reference =
        ecgbench::wfdb::parse_reference_csv(config.labels, vocabulary);
    for (const std::string& id : record_ids) {
      const auto it = reference.find(id);
      if (it == reference.end()) {
        throw DataError("record " + id + " has no entry in " + config.labels);
      }
      truth.push_back(it->second.labels);
    }
    return truth;
  }

  if (!config.manifest.empty()) {
    const ecgbench::wfdb::DatasetManifest manifest =
        ecgbench::wfdb::load_manifest(config.manifest);
    std::map<std::string, const ecgbench::wfdb::ManifestEntry*> by_id;
    for (const ecgbench::wfdb::ManifestEntry& entry : manifest.entries) {
      by_id[entry.labels.record_id] = &entry;
    }
    for (const std::string& id : record_ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw DataError("record " + id + " is not in " + config.manifest);
      }
      truth.push_back(it->second->labels.labels);
    }
    return truth;
  }

  if (!config.mapping.empty()) {
    const ecgbench::wfdb::CodeMapping mapping =
        ecgbench::wfdb::CodeMapping::from_csv(config.mapping);
    const fs::path data(config.data);
    for (const std::string& id : record_ids) {
      const fs::path header_path =
          fs::is_regular_file(data) ? data : data / (id + ".hea");
      std::ifstream in(header_path);
      if (!in) throw DataError("cannot read " + header_path.string());
      std::stringstream text;
      text << in.rdbuf();
      const ecgbench::wfdb::RecordHeader header =
          ecgbench::wfdb::parse_header(text.str());
      truth.push_back(
          ecgbench::wfdb::parse_header_labels(header, vocabulary, mapping)
              .labels);
    }
    return truth;
  }

  throw DataError(
      "no label source configured (need --labels, --manifest, or --mapping)");
}

// ---------------------------------------------------------------------------

void write_predictions_csv(const fs::path& path,
                           const std::vector<std::string>& record_ids,
                           const std::vector<std::string>& classes,
                           const std::vector<std::vector<double>>& probs,
                           const std::vector<std::vector<std::string>>& sets) {
  std::ostringstream out;
  out << "record_id";
  for (const std::string& symbol : classes) {
    out << ',' << ecgbench::csv_escape(symbol);
  }
  out << ",predicted\n";
  for (std::size_t r = 0; r < record_ids.size(); ++r) {
    out << ecgbench::csv_escape(record_ids[r]);
    for (double p : probs[r]) out << ',' << ecgbench::format_double(p);
    std::string joined;
    for (std::size_t i = 0; i < sets[r].size(); ++i) {
      if (i > 0) joined.push_back('|');
      joined += sets[r][i];
    }
    out << ',' << ecgbench::csv_escape(joined) << '\n';
  }
  write_text_file(path, out.str());
}

PredictionsFile read_predictions_csv(const fs::path& path) {
  const std::vector<std::vector<std::string>> rows = ecgbench::read_csv(path);
  if (rows.empty() || rows.front().size() < 2 ||
      rows.front().front() != "record_id" ||
      rows.front().back() != "predicted") {
    throw DataError("not a predictions CSV: " + path.string());
  }
  PredictionsFile file;
  file.classes.assign(rows.front().begin() + 1, rows.front().end() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      throw DataError("ragged predictions CSV row " + std::to_string(r + 1));
    }
    file.record_ids.push_back(rows[r].front());
    std::vector<double> probs;
    for (std::size_t c = 1; c + 1 < rows[r].size(); ++c) {
      probs.push_back(ecgbench::parse_double(rows[r][c]));
    }
    file.probs.push_back(std::move(probs));
    const std::string& joined = rows[r].back();
    std::vector<std::string> labels;
    if (!joined.empty()) labels = split_on(joined, '|');
    file.sets.push_back(std::move(labels));
  }
  return file;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace ecgtool
