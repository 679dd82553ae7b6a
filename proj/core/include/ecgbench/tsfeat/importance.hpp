#pragma once

#include <map>
#include <string>
#include <vector>

namespace ecgbench::tsfeat {

// Aggregate importance of one catalog group.
struct GroupImportance {
  std::string group;
  std::size_t feature_count = 0;
  double score = 0.0;
};

// The catalog group a feature name belongs to: the segment after the
// optional "lead<i>__" prefix, up to the next "__". Unknown groups raise
// GroupingError.
std::string feature_group_of(const std::string& feature_name);

// Sums per-feature scores by group; sorted by score descending, group name
// ascending on ties. Scores must be non-negative.
std::vector<GroupImportance> aggregate_importance(
    const std::map<std::string, double>& feature_scores);

// Renders the aggregate as an aligned text table (group, count, score).
std::string render_importance(const std::vector<GroupImportance>& groups);

}  // namespace ecgbench::tsfeat
