#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ecgbench::evalkit {

// One row of a classification report.  Aggregate rows reuse the struct with
// labels "micro avg", "macro avg", "weighted avg", "samples avg".
struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;  // vocabulary order
  ClassMetrics micro;
  ClassMetrics macro;
  ClassMetrics weighted;
  ClassMetrics samples;
};

using LabelSets = std::vector<std::vector<std::string>>;

// Multi-label precision/recall/F1 per class plus the four aggregate rows.
// Per class: precision TP/(TP+FP), recall TP/(TP+FN), f1 2PR/(P+R), each
// 0.0 when its denominator is zero.  Micro pools counts over classes; macro
// averages classes unweighted (zero-support classes included); weighted
// averages by support; samples averages per-record set precision/recall/F1
// uniformly over records.  Throws DataError on length mismatch or a label
// outside the vocabulary.
ClassificationReport classification_report(
    const LabelSets& truth, const LabelSets& predicted,
    const std::vector<std::string>& vocabulary);

// Two-decimal half-up rounding used for all rendered metrics.
double round_half_up_2(double value);

// Aligned text table: one row per class then the four aggregate rows, with
// columns Classes / Precision / Recall / F1 Score / Support at two decimals.
std::string render_report(const ClassificationReport& report);

// Micro-F1 of one record subset (bucket) per source tag.
struct SourceBreakdown {
  std::string source;
  std::size_t records = 0;
  double mean_length_s = 0.0;  // 0 when record lengths were not supplied
  double micro_f1 = 0.0;
};

// Partitions records by source tag and computes a pooled (micro) F1 per
// source, ordered like `known_sources`.  A tag absent from known_sources
// raises DataError; sources with no records are omitted with a note in
// `warnings`.  `record_lengths_s` (optional) fills mean_length_s.
std::vector<SourceBreakdown> f1_by_group(
    const LabelSets& truth, const LabelSets& predicted,
    const std::vector<std::string>& source_tags,
    const std::vector<std::string>& known_sources,
    const std::vector<double>* record_lengths_s = nullptr,
    std::vector<std::string>* warnings = nullptr);

// Aligned text table of per-source F1 for several models: one column per
// source (annotated with its mean record length), one row per model.
std::string render_source_table(
    const std::vector<std::pair<std::string, std::vector<SourceBreakdown>>>&
        models);

}  // namespace ecgbench::evalkit
