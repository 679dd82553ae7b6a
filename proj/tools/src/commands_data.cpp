#include <algorithm>
#include <array>
#include <optional>
#include <sstream>

#include "commands.hpp"
#include "ecgbench/dsp.hpp"
#include "ecgbench/errors.hpp"
#include "ecgbench/hrv/detector.hpp"
#include "ecgbench/hrv/image_io.hpp"
#include "ecgbench/hrv/poincare.hpp"
#include "ecgbench/tsfeat/features.hpp"
#include "ecgbench/tsfeat/matrix.hpp"
#include "ecgbench/tsfeat/spec.hpp"
#include "ecgbench/util/csv.hpp"
#include "ecgbench/wfdb/manifest.hpp"

namespace ecgtool {

using ecgbench::DataError;
using ecgbench::Signal;

namespace {

// Outcome slot of one record in a fan-out stage; exactly one member is set.
struct RecordOutcome {
  std::vector<fs::path> artifacts;
  std::optional<std::string> error;
};

// Runs `body` for each record header across the worker pool, capturing
// domain errors per record instead of aborting the batch. Artifacts and
// failures land in the manifest in record order. Returns the number of
// records that succeeded.
std::size_t fan_out(
    const std::vector<fs::path>& headers, const RunConfig& config,
    RunManifest& manifest,
    const std::function<std::vector<fs::path>(std::size_t, const fs::path&)>&
        body) {
  std::vector<RecordOutcome> outcomes(headers.size());
  parallel_for(headers.size(), config.jobs, [&](std::size_t i) {
    try {
      outcomes[i].artifacts = body(i, headers[i]);
    } catch (const ecgbench::Error& error) {
      outcomes[i].error = error.what();
    }
  });
  std::size_t succeeded = 0;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (outcomes[i].error) {
      manifest.add_failure(headers[i].stem().string(), *outcomes[i].error);
    } else {
      ++succeeded;
      for (const fs::path& artifact : outcomes[i].artifacts) {
        manifest.add_artifact(artifact);
      }
    }
  }
  return succeeded;
}

int finish(const RunManifest& manifest, const RunConfig& config,
           std::size_t succeeded, std::size_t total) {
  manifest.write(config.out);
  if (succeeded == 0 && total > 0) {
    throw DataError("every record failed; see the run manifest");
  }
  return 0;
}

}  // namespace

int run_ingest(const RunConfig& config) {
  validate_config(config, {"data"});
  const std::vector<fs::path> headers = list_records(config.data);
  RunManifest manifest("ingest", config);
  const fs::path out_dir = fs::path(config.out) / "conditioned";
  fs::create_directories(out_dir);

  struct IngestRow {
    std::string id;
    double length_s = 0.0;
    std::string conditioned_path;
  };
  std::vector<std::optional<IngestRow>> rows(headers.size());

  const std::size_t succeeded = fan_out(
      headers, config, manifest, [&](std::size_t i, const fs::path& header) {
        const ecgbench::wfdb::SignalRecord record =
            ecgbench::wfdb::load_record(header);
        const Signal& lead = ecgbench::wfdb::analysis_lead(record);
        const Signal conditioned = condition_signal(
            lead, config.resample_hz, config.low_hz, config.high_hz);

        ecgbench::wfdb::SignalRecord out;
        out.header.record_id = record.header.record_id;
        out.header.num_leads = 1;
        out.header.sampling_rate_hz = conditioned.sampling_rate_hz;
        out.header.num_samples = conditioned.samples.size();
        ecgbench::wfdb::LeadSpec lead_spec;
        lead_spec.filename = record.header.record_id + ".dat";
        lead_spec.name = "II";
        out.header.leads.push_back(lead_spec);
        out.header.comments = record.header.comments;
        out.leads.push_back(conditioned);
        const fs::path written = ecgbench::wfdb::store_record(out, out_dir);

        IngestRow row;
        row.id = record.header.record_id;
        row.length_s = static_cast<double>(conditioned.samples.size()) /
                       conditioned.sampling_rate_hz;
        row.conditioned_path = written.generic_string();
        rows[i] = row;

        return std::vector<fs::path>{written,
                                     written.parent_path() /
                                         (record.header.record_id + ".dat")};
      });

  // Optional stratified split over whatever records carry labels.
  if (!config.split_ratios.empty()) {
    const ecgbench::wfdb::Vocabulary vocabulary = active_vocabulary(config);
    std::vector<std::string> ids;
    std::vector<fs::path> paths;
    std::vector<double> lengths;
    for (const std::optional<IngestRow>& row : rows) {
      if (!row) continue;
      ids.push_back(row->id);
      paths.emplace_back(row->conditioned_path);
      lengths.push_back(row->length_s);
    }
    const std::vector<std::vector<std::string>> truth =
        load_truth(config, ids, vocabulary);
    std::vector<ecgbench::wfdb::DatasetEntry> entries(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      entries[i].record_path = paths[i].generic_string();
      entries[i].labels.record_id = ids[i];
      entries[i].labels.labels = truth[i];
      entries[i].length_s = lengths[i];
    }
    const ecgbench::wfdb::DatasetManifest dataset =
        ecgbench::wfdb::split_dataset(
            std::move(entries),
            {config.split_ratios[0], config.split_ratios[1],
             config.split_ratios[2]},
            config.seed);
    const fs::path manifest_path =
        fs::path(config.out) / "dataset_manifest.json";
    ecgbench::wfdb::save_manifest(dataset, manifest_path);
    manifest.add_artifact(manifest_path);
  }

  return finish(manifest, config, succeeded, headers.size());
}

int run_detect(const RunConfig& config) {
  validate_config(config, {"data"});
  const std::vector<fs::path> headers = list_records(config.data);
  RunManifest manifest("detect", config);
  const fs::path peaks_dir = fs::path(config.out) / "peaks";
  const fs::path nn_dir = fs::path(config.out) / "nn";

  const std::size_t succeeded = fan_out(
      headers, config, manifest, [&](std::size_t, const fs::path& header) {
        const ecgbench::wfdb::SignalRecord record =
            ecgbench::wfdb::load_record(header);
        const Signal& lead = ecgbench::wfdb::analysis_lead(record);
        const Signal conditioned = condition_signal(
            lead, config.resample_hz, config.low_hz, config.high_hz);
        const ecgbench::hrv::RPeakList peaks =
            ecgbench::hrv::detect_rpeaks(conditioned);
        const std::vector<double> intervals =
            ecgbench::hrv::to_nn_intervals(peaks);

        const std::string& id = record.header.record_id;
        std::ostringstream peaks_csv;
        peaks_csv << "sample,time_s\n";
        for (std::size_t index : peaks.indices) {
          peaks_csv << index << ','
                    << ecgbench::format_double(
                           static_cast<double>(index) /
                           peaks.sampling_rate_hz)
                    << '\n';
        }
        const fs::path peaks_path = peaks_dir / (id + ".csv");
        write_text_file(peaks_path, peaks_csv.str());

        std::ostringstream nn_csv;
        nn_csv << "nn_s\n";
        for (double nn : intervals) {
          nn_csv << ecgbench::format_double(nn) << '\n';
        }
        const fs::path nn_path = nn_dir / (id + ".csv");
        write_text_file(nn_path, nn_csv.str());

        return std::vector<fs::path>{peaks_path, nn_path};
      });

  return finish(manifest, config, succeeded, headers.size());
}

int run_poincare(const RunConfig& config) {
  validate_config(config, {"data"});
  const std::vector<fs::path> headers = list_records(config.data);
  RunManifest manifest("poincare", config);
  const fs::path image_dir = fs::path(config.out) / "poincare";
  fs::create_directories(image_dir);

  const std::size_t succeeded = fan_out(
      headers, config, manifest, [&](std::size_t, const fs::path& header) {
        const ecgbench::wfdb::SignalRecord record =
            ecgbench::wfdb::load_record(header);
        const Signal& lead = ecgbench::wfdb::analysis_lead(record);
        const Signal conditioned = condition_signal(
            lead, config.resample_hz, config.low_hz, config.high_hz);
        const ecgbench::hrv::RPeakList peaks =
            ecgbench::hrv::detect_rpeaks(conditioned);
        const std::vector<double> intervals =
            ecgbench::hrv::to_nn_intervals(peaks);
        const ecgbench::hrv::PoincareImage image =
            ecgbench::hrv::rasterize_poincare(
                ecgbench::hrv::poincare_points(intervals));

        const std::string& id = record.header.record_id;
        const fs::path pgm = image_dir / (id + ".pgm");
        const fs::path png = image_dir / (id + ".png");
        ecgbench::hrv::write_pgm(image, pgm);
        ecgbench::hrv::write_png(image, png);
        return std::vector<fs::path>{pgm, png};
      });

  return finish(manifest, config, succeeded, headers.size());
}

int run_features(const RunConfig& config) {
  validate_config(config, {"data"});
  const std::vector<fs::path> headers = list_records(config.data);
  RunManifest manifest("features", config);

  const std::vector<ecgbench::tsfeat::FeatureSpec> specs =
      config.spec.empty() ? ecgbench::tsfeat::default_specs()
                          : ecgbench::tsfeat::specs_from_toml(config.spec);

  std::vector<std::string> ids(headers.size());
  std::vector<ecgbench::tsfeat::FeatureVector> vectors(headers.size());
  std::vector<std::optional<std::string>> errors(headers.size());
  parallel_for(headers.size(), config.jobs, [&](std::size_t i) {
    try {
      const ecgbench::wfdb::SignalRecord record =
          ecgbench::wfdb::load_record(headers[i]);
      ids[i] = record.header.record_id;
      std::vector<Signal> leads;
      if (config.all_leads) {
        leads = record.leads;
      } else {
        leads.push_back(ecgbench::wfdb::analysis_lead(record));
      }
      vectors[i] = ecgbench::tsfeat::extract_all(leads, specs);
    } catch (const ecgbench::Error& error) {
      errors[i] = error.what();
    }
  });

  std::vector<std::string> kept_ids;
  std::vector<ecgbench::tsfeat::FeatureVector> kept_vectors;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (errors[i]) {
      manifest.add_failure(headers[i].stem().string(), *errors[i]);
    } else {
      kept_ids.push_back(ids[i]);
      kept_vectors.push_back(std::move(vectors[i]));
    }
  }
  if (kept_ids.empty()) {
    manifest.write(config.out);
    throw DataError("every record failed; see the run manifest");
  }

  const ecgbench::tsfeat::FeatureMatrix matrix =
      ecgbench::tsfeat::build_matrix(kept_ids, kept_vectors);
  fs::create_directories(config.out);
  const fs::path csv_path = fs::path(config.out) / "features.csv";
  ecgbench::tsfeat::save_matrix_csv(matrix, csv_path);
  manifest.add_artifact(csv_path);
  return finish(manifest, config, kept_ids.size(), headers.size());
}

}  // namespace ecgtool
