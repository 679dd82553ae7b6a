#include "ecgbench/wfdb/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/rng.hpp"

namespace ecgbench::wfdb {
namespace {

constexpr std::size_t kSplits = 3;

// Global split sizes n_s for total n: cumulative floors of the ratio prefix
// sums, so sizes always sum to n and each is within 1 of ratio * n.
std::array<std::size_t, kSplits> global_targets(
    std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, kSplits> targets{};
  double cumulative = 0.0;
  std::size_t previous = 0;
  for (std::size_t s = 0; s < kSplits; ++s) {
    cumulative += ratios[s];
    std::size_t boundary =
        s + 1 == kSplits
            ? n
            : static_cast<std::size_t>(
                  std::floor(cumulative * static_cast<double>(n) + 1e-9));
    boundary = std::min(boundary, n);
    targets[s] = boundary - previous;
    previous = boundary;
  }
  return targets;
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ParseError("unknown split tag '" + name + "'");
}

DatasetManifest split_dataset(std::vector<DatasetEntry> entries,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed) {
  if (entries.size() < 3) {
    throw SplitError("need at least 3 records to split");
  }
  double ratio_sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw SplitError("split ratios must be positive");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) {
    throw SplitError("split ratios must sum to 1");
  }
  for (const DatasetEntry& entry : entries) {
    if (entry.labels.labels.empty()) {
      throw SplitError("record " + entry.record_path + " has no labels");
    }
  }

  // Canonical order, then one seeded shuffle; stratum grouping below keeps
  // this order within each class.
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) {
              return a.record_path < b.record_path;
            });
  Rng rng = Rng::substream(seed, "split");
  rng.shuffle(entries);

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    strata[entries[i].labels.labels.front()].push_back(i);
  }

  const std::array<std::size_t, kSplits> targets =
      global_targets(entries.size(), ratios);

  // Per-cell floor allocation plus fractional parts.
  struct Cell {
    std::size_t stratum;
    std::size_t split;
    double frac;
  };
  const std::size_t num_strata = strata.size();
  std::vector<std::vector<std::size_t>> alloc(
      num_strata, std::vector<std::size_t>(kSplits, 0));
  std::vector<std::size_t> supply(num_strata, 0);  // leftover units per class
  std::vector<Cell> cells;
  {
    std::size_t c = 0;
    for (const auto& [label, members] : strata) {
      std::size_t assigned = 0;
      for (std::size_t s = 0; s < kSplits; ++s) {
        const double ideal =
            ratios[s] * static_cast<double>(members.size());
        const auto base = static_cast<std::size_t>(std::floor(ideal + 1e-9));
        alloc[c][s] = base;
        assigned += base;
        cells.push_back(Cell{c, s, ideal - static_cast<double>(base)});
      }
      supply[c] = members.size() - assigned;
      ++c;
    }
  }
  std::array<std::size_t, kSplits> demand{};
  for (std::size_t s = 0; s < kSplits; ++s) {
    std::size_t floored = 0;
    for (std::size_t c = 0; c < num_strata; ++c) floored += alloc[c][s];
    demand[s] = targets[s] - std::min(targets[s], floored);
  }

  // Controlled rounding: hand out the leftover units, at most one extra per
  // cell, preferring large fractional parts. Ties break on stratum then
  // split order so the result is deterministic.
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) {
                     if (a.frac != b.frac) return a.frac > b.frac;
                     if (a.stratum != b.stratum) return a.stratum < b.stratum;
                     return a.split < b.split;
                   });
  std::vector<std::vector<bool>> topped(
      num_strata, std::vector<bool>(kSplits, false));
  for (const Cell& cell : cells) {
    if (supply[cell.stratum] == 0 || demand[cell.split] == 0) continue;
    alloc[cell.stratum][cell.split] += 1;
    topped[cell.stratum][cell.split] = true;
    supply[cell.stratum] -= 1;
    demand[cell.split] -= 1;
  }
  // Rare leftover (greedy blocked by the one-extra cap): push the remaining
  // units along augmenting paths in the residual graph. A path alternates
  // class -> split (add an extra) and split -> class (retract an extra), so
  // every cell stays within one unit of its floor.
  for (std::size_t s = 0; s < kSplits; ++s) {
    while (demand[s] > 0) {
      std::vector<std::ptrdiff_t> split_via_class(kSplits, -1);
      std::vector<std::ptrdiff_t> class_via_split(num_strata, -2);
      std::vector<std::size_t> class_frontier;
      for (std::size_t c = 0; c < num_strata; ++c) {
        if (supply[c] > 0) {
          class_via_split[c] = -1;  // search root
          class_frontier.push_back(c);
        }
      }
      bool found = false;
      while (!found && !class_frontier.empty()) {
        std::vector<std::size_t> split_frontier;
        for (std::size_t c : class_frontier) {
          for (std::size_t t = 0; t < kSplits; ++t) {
            if (topped[c][t] || split_via_class[t] != -1) continue;
            split_via_class[t] = static_cast<std::ptrdiff_t>(c);
            if (t == s) {
              found = true;
              break;
            }
            split_frontier.push_back(t);
          }
          if (found) break;
        }
        if (found) break;
        class_frontier.clear();
        for (std::size_t t : split_frontier) {
          for (std::size_t d = 0; d < num_strata; ++d) {
            if (!topped[d][t] || class_via_split[d] != -2) continue;
            class_via_split[d] = static_cast<std::ptrdiff_t>(t);
            class_frontier.push_back(d);
          }
        }
      }
      if (!found) throw SplitError("stratified allocation failed");
      std::size_t at = s;
      while (true) {
        const auto c = static_cast<std::size_t>(split_via_class[at]);
        alloc[c][at] += 1;
        topped[c][at] = true;
        if (class_via_split[c] == -1) {
          supply[c] -= 1;
          break;
        }
        const auto back = static_cast<std::size_t>(class_via_split[c]);
        alloc[c][back] -= 1;
        topped[c][back] = false;
        at = back;
      }
      demand[s] -= 1;
    }
  }

  DatasetManifest manifest;
  manifest.entries.reserve(entries.size());
  {
    std::size_t c = 0;
    for (const auto& [label, members] : strata) {
      std::size_t cursor = 0;
      for (std::size_t s = 0; s < kSplits; ++s) {
        for (std::size_t k = 0; k < alloc[c][s]; ++k, ++cursor) {
          const DatasetEntry& entry = entries[members.at(cursor)];
          manifest.entries.push_back(ManifestEntry{
              entry.record_path, entry.labels, entry.length_s,
              static_cast<Split>(s)});
        }
      }
      if (cursor != members.size()) {
        throw SplitError("stratified allocation failed");
      }
      ++c;
    }
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.record_path < b.record_path;
            });
  manifest.stats = compute_stats(manifest.entries);
  return manifest;
}

std::array<SplitStats, 3> compute_stats(
    const std::vector<ManifestEntry>& entries) {
  std::array<SplitStats, 3> stats{};
  std::array<std::vector<double>, 3> lengths;
  for (const ManifestEntry& entry : entries) {
    lengths[static_cast<std::size_t>(entry.split)].push_back(entry.length_s);
  }
  for (std::size_t s = 0; s < 3; ++s) {
    auto& values = lengths[s];
    SplitStats& out = stats[s];
    out.count = values.size();
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean_s = sum / static_cast<double>(values.size());
    out.min_s = values.front();
    out.max_s = values.back();
    const std::size_t mid = values.size() / 2;
    out.median_s = values.size() % 2 == 1
                       ? values[mid]
                       : 0.5 * (values[mid - 1] + values[mid]);
  }
  return stats;
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["entries"] = nlohmann::json::array();
  for (const ManifestEntry& entry : manifest.entries) {
    doc["entries"].push_back({{"path", entry.record_path},
                              {"record_id", entry.labels.record_id},
                              {"labels", entry.labels.labels},
                              {"length_s", entry.length_s},
                              {"split", split_name(entry.split)}});
  }
  for (std::size_t s = 0; s < 3; ++s) {
    const SplitStats& st = manifest.stats[s];
    doc["stats"][split_name(static_cast<Split>(s))] = {
        {"count", st.count},     {"mean_s", st.mean_s},
        {"min_s", st.min_s},     {"median_s", st.median_s},
        {"max_s", st.max_s}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write manifest: " + path.string());
  out << doc.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest JSON: " + std::string(e.what()));
  }
  DatasetManifest manifest;
  try {
    for (const auto& item : doc.at("entries")) {
      ManifestEntry entry;
      entry.record_path = item.at("path").get<std::string>();
      entry.labels.record_id = item.at("record_id").get<std::string>();
      entry.labels.labels =
          item.at("labels").get<std::vector<std::string>>();
      entry.length_s = item.at("length_s").get<double>();
      entry.split = split_from_name(item.at("split").get<std::string>());
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest JSON: " + std::string(e.what()));
  }
  manifest.stats = compute_stats(manifest.entries);
  return manifest;
}

}  // namespace ecgbench::wfdb
