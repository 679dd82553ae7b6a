#include "ecgbench/tsfeat/importance.hpp"

#include <algorithm>
#include <cstdio>

#include "ecgbench/errors.hpp"
#include "ecgbench/tsfeat/spec.hpp"

namespace ecgbench::tsfeat {

std::string feature_group_of(const std::string& feature_name) {
  std::string body = feature_name;
  if (body.compare(0, 4, "lead") == 0) {
    const std::size_t sep = body.find("__");
    if (sep != std::string::npos) body = body.substr(sep + 2);
  }
  const std::size_t sep = body.find("__");
  const std::string group =
      sep == std::string::npos ? body : body.substr(0, sep);
  if (!is_catalog_group(group)) {
    throw GroupingError("feature '" + feature_name +
                        "' matches no catalog group");
  }
  return group;
}

std::vector<GroupImportance> aggregate_importance(
    const std::map<std::string, double>& feature_scores) {
  std::map<std::string, GroupImportance> by_group;
  for (const auto& [name, score] : feature_scores) {
    if (score < 0.0) {
      throw GroupingError("negative importance for feature '" + name + "'");
    }
    const std::string group = feature_group_of(name);
    GroupImportance& entry = by_group[group];
    entry.group = group;
    entry.feature_count += 1;
    entry.score += score;
  }
  std::vector<GroupImportance> out;
  out.reserve(by_group.size());
  for (auto& [group, entry] : by_group) out.push_back(std::move(entry));
  std::sort(out.begin(), out.end(),
            [](const GroupImportance& a, const GroupImportance& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.group < b.group;
            });
  return out;
}

std::string render_importance(const std::vector<GroupImportance>& groups) {
  std::size_t width = 13;  // "Feature group"
  for (const GroupImportance& g : groups) {
    width = std::max(width, g.group.size());
  }
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-*s  %8s  %8s\n",
                static_cast<int>(width), "Feature group", "Count", "Score");
  out += line;
  for (const GroupImportance& g : groups) {
    std::snprintf(line, sizeof(line), "%-*s  %8zu  %8.4f\n",
                  static_cast<int>(width), g.group.c_str(), g.feature_count,
                  g.score);
    out += line;
  }
  return out;
}

}  // namespace ecgbench::tsfeat
