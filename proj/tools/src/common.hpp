#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ecgbench/gbt/booster.hpp"
#include "ecgbench/signal.hpp"
#include "ecgbench/util/toml.hpp"
#include "ecgbench/wfdb/labels.hpp"
#include "ecgbench/wfdb/record.hpp"
#include "json.hpp"

namespace ecgtool {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// Every knob of every subcommand lives here so the run manifest can echo the
// complete effective configuration with per-field provenance.
struct RunConfig {
  // Paths.
  std::string data;        // record directory or a single .hea file
  std::string out = "out";
  std::string labels;      // reference CSV (record,symbol rows)
  std::string mapping;     // diagnosis-code mapping CSV
  std::string manifest;    // dataset manifest JSON (split-aware input)
  std::string spec;        // feature-grid TOML
  std::string model_file;  // serialized model to load
  // Pipeline selection.
  std::string pipeline = "raw-1d";  // poincare-image | raw-1d | features-boost
  std::string model = "";          // cnn1d | resnet1d | gbt | none
  std::uint64_t seed = 7;
  std::size_t window = 18000;
  long long resample_hz = 300;
  double low_hz = 3.0;
  double high_hz = 45.0;
  long long jobs = 1;
  double threshold = 0.5;
  bool all_leads = false;
  std::vector<double> split_ratios;  // empty disables dataset splitting
  // Neural training.
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double stop_accuracy = 0.0;
  std::size_t blocks = 0;  // 0 keeps each architecture's full depth
  // Boosting.
  ecgbench::gbt::BoostConfig boost;
  std::size_t search_trials = 0;  // random hyperparameter search (0 = off)
  // Reporting / benchmarking extras.
  std::string truth;        // reference CSV for report
  std::string predictions;  // predictions CSV for report
  std::string sources;      // record_id,source,length_s CSV for report
  std::string name;         // display name for report/bench tables
  std::string class_symbol; // target class for gradcam
  std::string record_id;    // record selector for gradcam
  std::size_t reps = 5;     // bench repetitions
  double duration_h = 0.0;  // bench energy duration
  double factor = 0.545;    // emission factor, grams CO2 per Wh
  std::vector<std::string> devices;  // bench "name=watts[@utilization]"

  // Field name -> flag | config | env | default.
  std::map<std::string, std::string> origins;
};

// Applies config-file values underneath already-parsed flags. `flag_given`
// answers whether a field arrived on the command line.
void merge_config_file(RunConfig& config, const ecgbench::TomlValue& document,
                       const std::function<bool(const std::string&)>& flag_given);

// Fills `origins` defaults and resolves the ECGBENCH_JOBS fallback plus the
// pipeline-dependent model default.
void finalize_config(RunConfig& config,
                     const std::function<bool(const std::string&)>& flag_given);

// Collects every violated invariant and throws a single ConfigError listing
// them all. `required` names fields the current command cannot run without.
void validate_config(const RunConfig& config,
                     const std::vector<std::string>& required);

ordered_json config_to_json(const RunConfig& config);

// ---------------------------------------------------------------------------

// Accumulates the per-run manifest: effective config, artifact checksums,
// per-record failures. Deterministic for a fixed config and seed (no
// timestamps, artifacts sorted by path).
class RunManifest {
 public:
  RunManifest(std::string command, const RunConfig& config);

  // Registers a written artifact; the checksum is computed from file bytes.
  void add_artifact(const fs::path& path);
  void add_warning(const std::string& message);
  void add_failure(const std::string& record_id, const std::string& message);

  bool has_failures() const { return !failures_.empty(); }
  std::size_t artifact_count() const { return artifacts_.size(); }

  // Writes <out>/<command>-manifest.json and returns its path.
  fs::path write(const fs::path& out_dir) const;

 private:
  std::string command_;
  ordered_json config_;
  std::vector<std::pair<std::string, std::string>> artifacts_;  // path, crc
  std::vector<std::string> warnings_;
  std::vector<std::pair<std::string, std::string>> failures_;
};

// CRC-32 (zlib polynomial) of a file's bytes as 8 hex digits.
std::string file_crc32(const fs::path& path);

// ---------------------------------------------------------------------------

// Record headers under `data` (sorted by record id), or just `data` itself
// when it points at a .hea file. Throws DataError when nothing is found.
std::vector<fs::path> list_records(const fs::path& data);

// Runs fn(0..n-1) over `jobs` threads (serial when jobs <= 1). The callable
// must confine itself to its own index; the first exception is rethrown.
void parallel_for(std::size_t n, long long jobs,
                  const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------

// Resamples to target_hz and band-passes low..high.
ecgbench::Signal condition_signal(const ecgbench::Signal& lead,
                                  long long target_hz, double low_hz,
                                  double high_hz);

// Standardizes then center-crops/pads to exactly `window` samples.
std::vector<double> window_samples(const ecgbench::Signal& conditioned,
                                   std::size_t window);

// The class vocabulary in play: the mapping CSV's symbols when provided,
// otherwise the four-class rhythm vocabulary.
ecgbench::wfdb::Vocabulary active_vocabulary(const RunConfig& config);

// Truth labels for the given records, from (in precedence order) the
// reference CSV, the dataset manifest, or header diagnosis comments
// (requires the mapping CSV). Throws DataError when no source is configured
// or a record has no labels.
std::vector<std::vector<std::string>> load_truth(
    const RunConfig& config, const std::vector<std::string>& record_ids,
    const ecgbench::wfdb::Vocabulary& vocabulary);

// ---------------------------------------------------------------------------

// Predictions CSV: header "record_id,<class...>,predicted"; probabilities in
// shortest round-trip form; `predicted` is the |-joined label set.
void write_predictions_csv(const fs::path& path,
                           const std::vector<std::string>& record_ids,
                           const std::vector<std::string>& classes,
                           const std::vector<std::vector<double>>& probs,
                           const std::vector<std::vector<std::string>>& sets);

struct PredictionsFile {
  std::vector<std::string> record_ids;
  std::vector<std::string> classes;
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<std::string>> sets;
};
PredictionsFile read_predictions_csv(const fs::path& path);

void write_text_file(const fs::path& path, const std::string& text);

}  // namespace ecgtool
