#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ecgbench/wfdb/header.hpp"

namespace ecgbench::wfdb {

// Sorted, de-duplicated class symbols for one record.
struct LabelSet {
  std::string record_id;
  std::vector<std::string> labels;
};

// Ordered class list; order fixes report rows and model output indices.
struct Vocabulary {
  std::vector<std::string> symbols;

  bool contains(const std::string& symbol) const;
  // Throws IndexError when the symbol is not in the vocabulary.
  std::size_t index_of(const std::string& symbol) const;
};

// The four-class rhythm vocabulary: N, A, O, ~.
Vocabulary rhythm2017_vocabulary();

// Diagnosis-code to symbol table loaded from a CSV with columns code,symbol.
struct CodeMapping {
  std::vector<std::pair<std::string, std::string>> entries;  // file order

  static CodeMapping from_csv(const std::filesystem::path& path);
  // nullptr when the code is unmapped.
  const std::string* symbol_for(const std::string& code) const;
  // Mapped symbols in file order plus trailing "Other".
  Vocabulary vocabulary() const;
};

// Reference-CSV labels ("record,symbol" rows). Every symbol must be in the
// vocabulary; unknown symbols raise LabelError.
std::map<std::string, LabelSet> parse_reference_csv(
    const std::filesystem::path& path, const Vocabulary& vocabulary);

// Labels from a header's "#Dx:" comment: mapped codes keep their symbol,
// unmapped codes collapse to Other. A record whose labels resolve to nothing
// (no Dx codes, or unmapped codes with no Other in the vocabulary) raises
// LabelError.
LabelSet parse_header_labels(const RecordHeader& header,
                             const Vocabulary& vocabulary,
                             const CodeMapping& mapping);

}  // namespace ecgbench::wfdb
