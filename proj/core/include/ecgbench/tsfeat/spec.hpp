#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ecgbench::tsfeat {

// Parameter values are numeric or symbolic (e.g. attr = "abs"). Integers are
// stored as doubles; names render them with the shortest round-trip form, so
// lag = 1 becomes "lag_1".
using ParamValue = std::variant<double, std::string>;

// One configured feature: a catalog group plus its ordered parameter list.
// Order is part of the feature name, so it must be canonical per group.
struct FeatureSpec {
  std::string group;
  std::vector<std::pair<std::string, ParamValue>> params;

  // "group__key_value__key_value"; parameterless groups render as "group".
  std::string name() const;

  // Typed lookups; throw SpecError when absent or of the wrong kind.
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
};

// The 22 supported group names, in catalog order.
const std::vector<std::string>& catalog_groups();
bool is_catalog_group(const std::string& group);

// The default extraction grid (one entry per configured feature).
std::vector<FeatureSpec> default_specs();

// Loads a grid from a TOML document with [[feature]] tables carrying
// group = "..." and params = { ... }. Unknown groups raise SpecError.
std::vector<FeatureSpec> specs_from_toml(const std::filesystem::path& path);

}  // namespace ecgbench::tsfeat
