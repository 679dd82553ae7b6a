#include "ecgbench/util/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ecgbench/errors.hpp"

namespace ecgbench {
namespace {

const char* kind_name(TomlValue::Kind kind) {
  switch (kind) {
    case TomlValue::Kind::String: return "string";
    case TomlValue::Kind::Integer: return "integer";
    case TomlValue::Kind::Float: return "float";
    case TomlValue::Kind::Boolean: return "boolean";
    case TomlValue::Kind::Array: return "array";
    case TomlValue::Kind::Table: return "table";
  }
  return "?";
}

[[noreturn]] void kind_error(TomlValue::Kind want, TomlValue::Kind got) {
  throw ParseError(std::string("TOML value is ") + kind_name(got) +
                   ", expected " + kind_name(want));
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("TOML line " + std::to_string(line) + ": " + message);
  }

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  // Skips spaces and tabs only.
  void skip_blanks() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }

  // Skips whitespace, newlines, and comments (used inside arrays).
  void skip_filler() {
    while (!done()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '#') {
        while (!done() && peek() != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  // Consumes end-of-line: optional comment, then newline or EOF.
  void expect_line_end() {
    skip_blanks();
    if (!done() && peek() == '#') {
      while (!done() && peek() != '\n') ++pos;
    }
    if (!done() && peek() == '\r') ++pos;
    if (done()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    take();
  }

  std::string parse_key() {
    skip_blanks();
    if (done()) fail("expected key");
    if (peek() == '"' || peek() == '\'') return parse_string();
    std::string key;
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        key += take();
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected key");
    return key;
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_key()};
    skip_blanks();
    while (!done() && peek() == '.') {
      take();
      path.push_back(parse_key());
      skip_blanks();
    }
    return path;
  }

  std::string parse_string() {
    const char quote = take();
    std::string out;
    while (true) {
      if (done()) fail("unterminated string");
      const char c = take();
      if (c == quote) break;
      if (c == '\n') fail("newline in string");
      if (quote == '"' && c == '\\') {
        if (done()) fail("dangling escape");
        const char esc = take();
        switch (esc) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + esc);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  TomlValue parse_number() {
    std::string token;
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
          c == '-' || c == '.' || c == '_') {
        token += take();
      } else {
        break;
      }
    }
    std::string digits;
    for (char c : token) {
      if (c != '_') digits += c;
    }
    const bool is_float =
        digits.find_first_of(".eE") != std::string::npos ||
        digits.find("inf") != std::string::npos ||
        digits.find("nan") != std::string::npos;
    if (is_float) {
      double value = 0.0;
      const auto result =
          std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (result.ec != std::errc{} ||
          result.ptr != digits.data() + digits.size()) {
        fail("invalid float '" + token + "'");
      }
      return TomlValue(value);
    }
    long long value = 0;
    const auto result =
        std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (result.ec != std::errc{} ||
        result.ptr != digits.data() + digits.size()) {
      fail("invalid integer '" + token + "'");
    }
    return TomlValue(value);
  }

  TomlValue parse_value() {
    skip_filler();
    if (done()) fail("expected value");
    const char c = peek();
    if (c == '"' || c == '\'') return TomlValue(parse_string());
    if (c == '[') {
      take();
      TomlValue::Array items;
      skip_filler();
      while (!done() && peek() != ']') {
        items.push_back(parse_value());
        skip_filler();
        if (!done() && peek() == ',') {
          take();
          skip_filler();
        } else {
          break;
        }
      }
      if (done() || peek() != ']') fail("unterminated array");
      take();
      return TomlValue(std::move(items));
    }
    if (c == '{') {
      take();
      TomlValue::Table table;
      skip_blanks();
      while (!done() && peek() != '}') {
        const std::string key = parse_key();
        skip_blanks();
        if (done() || peek() != '=') fail("expected '=' in inline table");
        take();
        if (!table.emplace(key, parse_value()).second) {
          fail("duplicate key '" + key + "' in inline table");
        }
        skip_blanks();
        if (!done() && peek() == ',') {
          take();
          skip_blanks();
        } else {
          break;
        }
      }
      if (done() || peek() != '}') fail("unterminated inline table");
      take();
      return TomlValue(std::move(table));
    }
    if (text.substr(pos, 4) == "true" ) { pos += 4; return TomlValue(true); }
    if (text.substr(pos, 5) == "false") { pos += 5; return TomlValue(false); }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        c == '.' || c == 'i' || c == 'n') {
      return parse_number();
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  // Walks a dotted path from the root, creating intermediate tables and
  // descending into the last element of arrays-of-tables.
  TomlValue::Table* navigate(TomlValue::Table* root,
                             const std::vector<std::string>& path,
                             std::size_t count) {
    TomlValue::Table* current = root;
    for (std::size_t i = 0; i < count; ++i) {
      auto it = current->emplace(path[i], TomlValue(TomlValue::Table{})).first;
      TomlValue& node = it->second;
      if (node.is_array()) {
        auto& array = node.as_array();
        if (array.empty() || !array.back().is_table()) {
          fail("'" + path[i] + "' is not a table array");
        }
        current = &array.back().as_table();
      } else if (node.is_table()) {
        current = &node.as_table();
      } else {
        fail("'" + path[i] + "' is not a table");
      }
    }
    return current;
  }

  TomlValue parse_document() {
    TomlValue root;
    TomlValue::Table* current = &root.as_table();
    while (!done()) {
      skip_blanks();
      if (done()) break;
      const char c = peek();
      if (c == '\n' || c == '\r') {
        expect_line_end();
        continue;
      }
      if (c == '#') {
        expect_line_end();
        continue;
      }
      if (c == '[') {
        take();
        const bool is_array = !done() && peek() == '[';
        if (is_array) take();
        const std::vector<std::string> path = parse_key_path();
        skip_blanks();
        if (done() || peek() != ']') fail("unterminated table header");
        take();
        if (is_array) {
          if (done() || peek() != ']') fail("expected ']]'");
          take();
        }
        expect_line_end();
        TomlValue::Table* parent =
            navigate(&root.as_table(), path, path.size() - 1);
        const std::string& name = path.back();
        if (is_array) {
          auto it = parent->emplace(name, TomlValue(TomlValue::Array{})).first;
          if (!it->second.is_array()) fail("'" + name + "' is not an array");
          auto& array = it->second.as_array();
          array.push_back(TomlValue(TomlValue::Table{}));
          current = &array.back().as_table();
        } else {
          auto [it, inserted] =
              parent->emplace(name, TomlValue(TomlValue::Table{}));
          if (!it->second.is_table()) fail("'" + name + "' is not a table");
          if (!inserted) fail("duplicate table [" + name + "]");
          current = &it->second.as_table();
        }
        continue;
      }
      const std::vector<std::string> path = parse_key_path();
      skip_blanks();
      if (done() || peek() != '=') fail("expected '='");
      take();
      TomlValue value = parse_value();
      expect_line_end();
      TomlValue::Table* parent = navigate(current, path, path.size() - 1);
      if (!parent->emplace(path.back(), std::move(value)).second) {
        fail("duplicate key '" + path.back() + "'");
      }
    }
    return root;
  }
};

}  // namespace

const std::string& TomlValue::as_string() const {
  if (kind() != Kind::String) kind_error(Kind::String, kind());
  return std::get<std::string>(value_);
}

long long TomlValue::as_int() const {
  if (kind() != Kind::Integer) kind_error(Kind::Integer, kind());
  return std::get<long long>(value_);
}

double TomlValue::as_double() const {
  if (kind() == Kind::Integer) {
    return static_cast<double>(std::get<long long>(value_));
  }
  if (kind() != Kind::Float) kind_error(Kind::Float, kind());
  return std::get<double>(value_);
}

bool TomlValue::as_bool() const {
  if (kind() != Kind::Boolean) kind_error(Kind::Boolean, kind());
  return std::get<bool>(value_);
}

const TomlValue::Array& TomlValue::as_array() const {
  if (kind() != Kind::Array) kind_error(Kind::Array, kind());
  return std::get<Array>(value_);
}

TomlValue::Array& TomlValue::as_array() {
  if (kind() != Kind::Array) kind_error(Kind::Array, kind());
  return std::get<Array>(value_);
}

const TomlValue::Table& TomlValue::as_table() const {
  if (kind() != Kind::Table) kind_error(Kind::Table, kind());
  return std::get<Table>(value_);
}

TomlValue::Table& TomlValue::as_table() {
  if (kind() != Kind::Table) kind_error(Kind::Table, kind());
  return std::get<Table>(value_);
}

const TomlValue* TomlValue::find(std::string_view key) const {
  if (kind() != Kind::Table) return nullptr;
  const auto& table = std::get<Table>(value_);
  const auto it = table.find(std::string(key));
  return it == table.end() ? nullptr : &it->second;
}

const TomlValue* TomlValue::find_path(std::string_view dotted) const {
  const TomlValue* node = this;
  std::size_t start = 0;
  while (node != nullptr) {
    const std::size_t dot = dotted.find('.', start);
    const std::string_view key = dotted.substr(
        start, dot == std::string_view::npos ? dotted.size() - start
                                             : dot - start);
    node = node->find(key);
    if (dot == std::string_view::npos) return node;
    start = dot + 1;
  }
  return nullptr;
}

TomlValue parse_toml(std::string_view text) {
  Parser parser{text};
  return parser.parse_document();
}

TomlValue parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open TOML file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_toml(buffer.str());
}

}  // namespace ecgbench
