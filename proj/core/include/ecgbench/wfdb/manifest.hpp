#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecgbench/wfdb/labels.hpp"

namespace ecgbench::wfdb {

enum class Split { train, val, test };

const char* split_name(Split split);
Split split_from_name(const std::string& name);

// A record known to the dataset but not yet assigned to a split.
struct DatasetEntry {
  std::string record_path;
  LabelSet labels;
  double length_s = 0.0;
};

struct ManifestEntry {
  std::string record_path;
  LabelSet labels;
  double length_s = 0.0;
  Split split = Split::train;
};

struct SplitStats {
  std::size_t count = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double median_s = 0.0;
  double max_s = 0.0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::array<SplitStats, 3> stats;  // indexed by Split

  const SplitStats& stats_for(Split split) const {
    return stats[static_cast<std::size_t>(split)];
  }
};

// Deterministic stratified split. Records are shuffled by a substream of
// `seed`, stratified by each record's lexicographically-first label, and
// allocated so that global split sizes follow the cumulative floor of the
// ratios while every class stays within one record of its own ideal split.
DatasetManifest split_dataset(std::vector<DatasetEntry> entries,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed);

// Recomputes per-split stats from the entries (used by the invariant check
// and by deserialization).
std::array<SplitStats, 3> compute_stats(
    const std::vector<ManifestEntry>& entries);

// JSON persistence.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace ecgbench::wfdb
