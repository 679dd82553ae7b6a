#include "ecgbench/wfdb/labels.hpp"

#include <algorithm>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"

namespace ecgbench::wfdb {
namespace {

std::string trim(const std::string& text) {
  const std::size_t begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const std::size_t end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

void sort_unique(std::vector<std::string>& labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

}  // namespace

bool Vocabulary::contains(const std::string& symbol) const {
  return std::find(symbols.begin(), symbols.end(), symbol) != symbols.end();
}

std::size_t Vocabulary::index_of(const std::string& symbol) const {
  const auto it = std::find(symbols.begin(), symbols.end(), symbol);
  if (it == symbols.end()) {
    throw IndexError("symbol '" + symbol + "' not in vocabulary");
  }
  return static_cast<std::size_t>(it - symbols.begin());
}

Vocabulary rhythm2017_vocabulary() { return Vocabulary{{"N", "A", "O", "~"}}; }

CodeMapping CodeMapping::from_csv(const std::filesystem::path& path) {
  CodeMapping mapping;
  const auto rows = read_csv(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && row.size() >= 2 && row[0] == "code") continue;  // header
    if (row.size() != 2) {
      throw ParseError("mapping row " + std::to_string(i + 1) +
                       ": expected 2 columns");
    }
    mapping.entries.emplace_back(row[0], row[1]);
  }
  return mapping;
}

const std::string* CodeMapping::symbol_for(const std::string& code) const {
  for (const auto& [mapped_code, symbol] : entries) {
    if (mapped_code == code) return &symbol;
  }
  return nullptr;
}

Vocabulary CodeMapping::vocabulary() const {
  Vocabulary vocab;
  for (const auto& [code, symbol] : entries) {
    if (std::find(vocab.symbols.begin(), vocab.symbols.end(), symbol) ==
        vocab.symbols.end()) {
      vocab.symbols.push_back(symbol);
    }
  }
  vocab.symbols.push_back("Other");
  return vocab;
}

std::map<std::string, LabelSet> parse_reference_csv(
    const std::filesystem::path& path, const Vocabulary& vocabulary) {
  std::map<std::string, LabelSet> result;
  for (const auto& row : read_csv(path)) {
    if (row.size() < 2) {
      throw ParseError("reference row needs record id and label");
    }
    LabelSet set;
    set.record_id = row[0];
    for (std::size_t i = 1; i < row.size(); ++i) {
      const std::string symbol = trim(row[i]);
      if (symbol.empty()) continue;
      if (!vocabulary.contains(symbol)) {
        throw LabelError("record " + set.record_id + ": symbol '" + symbol +
                         "' not in vocabulary");
      }
      set.labels.push_back(symbol);
    }
    if (set.labels.empty()) {
      throw LabelError("record " + set.record_id + " has no labels");
    }
    sort_unique(set.labels);
    result[set.record_id] = std::move(set);
  }
  return result;
}

LabelSet parse_header_labels(const RecordHeader& header,
                             const Vocabulary& vocabulary,
                             const CodeMapping& mapping) {
  LabelSet set;
  set.record_id = header.record_id;
  for (const std::string& comment : header.comments) {
    std::string body = comment;
    body.erase(0, body.find_first_not_of("# \t"));
    if (body.compare(0, 3, "Dx:") != 0) continue;
    body.erase(0, 3);
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t comma = body.find(',', start);
      const std::string code =
          trim(body.substr(start, comma == std::string::npos
                                      ? std::string::npos
                                      : comma - start));
      if (!code.empty()) {
        const std::string* symbol = mapping.symbol_for(code);
        if (symbol != nullptr && vocabulary.contains(*symbol)) {
          set.labels.push_back(*symbol);
        } else if (vocabulary.contains("Other")) {
          set.labels.push_back("Other");
        }
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (set.labels.empty()) {
    throw LabelError("record " + header.record_id +
                     " has no mappable labels");
  }
  sort_unique(set.labels);
  return set;
}

}  // namespace ecgbench::wfdb
