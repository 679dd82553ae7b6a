#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ecgbench {

// Minimal TOML document model covering what the toolkit's config files use:
// string/integer/float/boolean scalars, arrays, inline tables, [section] and
// [[array-of-tables]] headers, and '#' comments. Dates are not supported.
class TomlValue {
 public:
  using Array = std::vector<TomlValue>;
  using Table = std::map<std::string, TomlValue>;

  enum class Kind { String, Integer, Float, Boolean, Array, Table };

  TomlValue() : value_(Table{}) {}
  explicit TomlValue(std::string v) : value_(std::move(v)) {}
  explicit TomlValue(long long v) : value_(v) {}
  explicit TomlValue(double v) : value_(v) {}
  explicit TomlValue(bool v) : value_(v) {}
  explicit TomlValue(Array v) : value_(std::move(v)) {}
  explicit TomlValue(Table v) : value_(std::move(v)) {}

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  bool is_table() const { return kind() == Kind::Table; }
  bool is_array() const { return kind() == Kind::Array; }

  // Typed accessors; throw ParseError when the stored kind differs.
  // as_double additionally accepts integers.
  const std::string& as_string() const;
  long long as_int() const;
  double as_double() const;
  bool as_bool() const;
  const Array& as_array() const;
  Array& as_array();
  const Table& as_table() const;
  Table& as_table();

  // Table lookup; nullptr when missing or when this is not a table.
  const TomlValue* find(std::string_view key) const;

  // Dotted-path lookup ("model.epochs"); nullptr when any hop is missing.
  const TomlValue* find_path(std::string_view dotted) const;

 private:
  std::variant<std::string, long long, double, bool, Array, Table> value_;
};

// Parses a complete document; the result is always a Table. Errors carry
// 1-based line numbers.
TomlValue parse_toml(std::string_view text);
TomlValue parse_toml_file(const std::filesystem::path& path);

}  // namespace ecgbench
