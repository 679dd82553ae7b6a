#include "ecgbench/evalkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "ecgbench/errors.hpp"

namespace ecgbench::evalkit {

namespace {

double ratio(double numerator, double denominator) {
  return denominator > 0.0 ? numerator / denominator : 0.0;
}

double f1_of(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

std::string format2(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", round_half_up_2(value));
  return buffer;
}

std::string pad_left(const std::string& text, std::size_t width) {
  return text.size() >= width
             ? text
             : std::string(width - text.size(), ' ') + text;
}

std::string pad_right(const std::string& text, std::size_t width) {
  return text.size() >= width
             ? text
             : text + std::string(width - text.size(), ' ');
}

// Per-record label sets as deduplicated class-index vectors.
std::vector<std::vector<std::size_t>> index_sets(
    const LabelSets& sets,
    const std::unordered_map<std::string, std::size_t>& vocab) {
  std::vector<std::vector<std::size_t>> out(sets.size());
  for (std::size_t r = 0; r < sets.size(); ++r) {
    std::vector<std::size_t>& ids = out[r];
    for (const std::string& label : sets[r]) {
      const auto it = vocab.find(label);
      if (it == vocab.end()) {
        throw DataError("label '" + label + "' is outside the vocabulary");
      }
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  return out;
}

std::size_t intersection_size(const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t hits = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++hits;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return hits;
}

}  // namespace

double round_half_up_2(double value) {
  return std::floor(value * 100.0 + 0.5) / 100.0;
}

ClassificationReport classification_report(
    const LabelSets& truth, const LabelSets& predicted,
    const std::vector<std::string>& vocabulary) {
  if (truth.size() != predicted.size()) {
    throw DataError("true and predicted label lists differ in length");
  }
  if (vocabulary.empty()) throw DataError("empty class vocabulary");

  std::unordered_map<std::string, std::size_t> vocab;
  for (std::size_t c = 0; c < vocabulary.size(); ++c) {
    vocab.emplace(vocabulary[c], c);
  }
  const std::vector<std::vector<std::size_t>> t_sets =
      index_sets(truth, vocab);
  const std::vector<std::vector<std::size_t>> p_sets =
      index_sets(predicted, vocab);

  const std::size_t num_classes = vocabulary.size();
  std::vector<std::size_t> tp(num_classes, 0);
  std::vector<std::size_t> fp(num_classes, 0);
  std::vector<std::size_t> fn(num_classes, 0);

  double sample_p = 0.0;
  double sample_r = 0.0;
  double sample_f = 0.0;
  for (std::size_t r = 0; r < t_sets.size(); ++r) {
    std::vector<char> in_truth(num_classes, 0);
    for (std::size_t c : t_sets[r]) in_truth[c] = 1;
    std::vector<char> in_pred(num_classes, 0);
    for (std::size_t c : p_sets[r]) in_pred[c] = 1;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (in_truth[c] && in_pred[c]) {
        ++tp[c];
      } else if (in_pred[c]) {
        ++fp[c];
      } else if (in_truth[c]) {
        ++fn[c];
      }
    }
    const double hits =
        static_cast<double>(intersection_size(t_sets[r], p_sets[r]));
    const double p = ratio(hits, static_cast<double>(p_sets[r].size()));
    const double q = ratio(hits, static_cast<double>(t_sets[r].size()));
    sample_p += p;
    sample_r += q;
    sample_f += f1_of(p, q);
  }

  ClassificationReport report;
  std::size_t total_support = 0;
  std::size_t pool_tp = 0;
  std::size_t pool_fp = 0;
  std::size_t pool_fn = 0;
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f = 0.0;
  double weighted_p = 0.0;
  double weighted_r = 0.0;
  double weighted_f = 0.0;

  for (std::size_t c = 0; c < num_classes; ++c) {
    ClassMetrics row;
    row.label = vocabulary[c];
    row.support = tp[c] + fn[c];
    row.precision = ratio(static_cast<double>(tp[c]),
                          static_cast<double>(tp[c] + fp[c]));
    row.recall = ratio(static_cast<double>(tp[c]),
                       static_cast<double>(tp[c] + fn[c]));
    row.f1 = f1_of(row.precision, row.recall);
    report.classes.push_back(row);

    total_support += row.support;
    pool_tp += tp[c];
    pool_fp += fp[c];
    pool_fn += fn[c];
    macro_p += row.precision;
    macro_r += row.recall;
    macro_f += row.f1;
    weighted_p += static_cast<double>(row.support) * row.precision;
    weighted_r += static_cast<double>(row.support) * row.recall;
    weighted_f += static_cast<double>(row.support) * row.f1;
  }

  report.micro.label = "micro avg";
  report.micro.support = total_support;
  report.micro.precision = ratio(static_cast<double>(pool_tp),
                                 static_cast<double>(pool_tp + pool_fp));
  report.micro.recall = ratio(static_cast<double>(pool_tp),
                              static_cast<double>(pool_tp + pool_fn));
  report.micro.f1 = f1_of(report.micro.precision, report.micro.recall);

  report.macro.label = "macro avg";
  report.macro.support = total_support;
  report.macro.precision = macro_p / static_cast<double>(num_classes);
  report.macro.recall = macro_r / static_cast<double>(num_classes);
  report.macro.f1 = macro_f / static_cast<double>(num_classes);

  report.weighted.label = "weighted avg";
  report.weighted.support = total_support;
  report.weighted.precision =
      ratio(weighted_p, static_cast<double>(total_support));
  report.weighted.recall =
      ratio(weighted_r, static_cast<double>(total_support));
  report.weighted.f1 = ratio(weighted_f, static_cast<double>(total_support));

  report.samples.label = "samples avg";
  report.samples.support = total_support;
  const auto records = static_cast<double>(t_sets.size());
  report.samples.precision = ratio(sample_p, records);
  report.samples.recall = ratio(sample_r, records);
  report.samples.f1 = ratio(sample_f, records);
  return report;
}

std::string render_report(const ClassificationReport& report) {
  std::vector<const ClassMetrics*> rows;
  rows.reserve(report.classes.size() + 4);
  for (const ClassMetrics& row : report.classes) rows.push_back(&row);
  rows.push_back(&report.micro);
  rows.push_back(&report.macro);
  rows.push_back(&report.weighted);
  rows.push_back(&report.samples);

  std::size_t label_width = std::string("Classes").size();
  for (const ClassMetrics* row : rows) {
    label_width = std::max(label_width, row->label.size());
  }

  std::ostringstream out;
  out << pad_right("Classes", label_width) << "  Precision  Recall  F1 Score"
      << "  Support\n";
  for (const ClassMetrics* row : rows) {
    out << pad_right(row->label, label_width) << "  "
        << pad_left(format2(row->precision), 9) << "  "
        << pad_left(format2(row->recall), 6) << "  "
        << pad_left(format2(row->f1), 8) << "  "
        << pad_left(std::to_string(row->support), 7) << "\n";
  }
  return out.str();
}

std::vector<SourceBreakdown> f1_by_group(
    const LabelSets& truth, const LabelSets& predicted,
    const std::vector<std::string>& source_tags,
    const std::vector<std::string>& known_sources,
    const std::vector<double>* record_lengths_s,
    std::vector<std::string>* warnings) {
  if (truth.size() != predicted.size() ||
      truth.size() != source_tags.size()) {
    throw DataError("labels, predictions and source tags differ in length");
  }
  if (record_lengths_s != nullptr &&
      record_lengths_s->size() != truth.size()) {
    throw DataError("record lengths differ in length from the label lists");
  }
  std::unordered_set<std::string> known(known_sources.begin(),
                                        known_sources.end());
  for (const std::string& tag : source_tags) {
    if (known.find(tag) == known.end()) {
      throw DataError("unknown source tag '" + tag + "'");
    }
  }

  std::vector<SourceBreakdown> out;
  for (const std::string& source : known_sources) {
    std::size_t records = 0;
    std::size_t pool_tp = 0;
    std::size_t pool_fp = 0;
    std::size_t pool_fn = 0;
    double length_sum = 0.0;
    for (std::size_t r = 0; r < truth.size(); ++r) {
      if (source_tags[r] != source) continue;
      ++records;
      if (record_lengths_s != nullptr) length_sum += (*record_lengths_s)[r];

      std::vector<std::string> t = truth[r];
      std::vector<std::string> p = predicted[r];
      std::sort(t.begin(), t.end());
      t.erase(std::unique(t.begin(), t.end()), t.end());
      std::sort(p.begin(), p.end());
      p.erase(std::unique(p.begin(), p.end()), p.end());
      std::vector<std::string> both;
      std::set_intersection(t.begin(), t.end(), p.begin(), p.end(),
                            std::back_inserter(both));
      pool_tp += both.size();
      pool_fp += p.size() - both.size();
      pool_fn += t.size() - both.size();
    }
    if (records == 0) {
      if (warnings != nullptr) {
        warnings->push_back("source '" + source + "' has no records; omitted");
      }
      continue;
    }
    SourceBreakdown row;
    row.source = source;
    row.records = records;
    row.mean_length_s = record_lengths_s != nullptr
                            ? length_sum / static_cast<double>(records)
                            : 0.0;
    const double denominator =
        static_cast<double>(2 * pool_tp + pool_fp + pool_fn);
    row.micro_f1 = ratio(static_cast<double>(2 * pool_tp), denominator);
    out.push_back(std::move(row));
  }
  return out;
}

std::string render_source_table(
    const std::vector<std::pair<std::string, std::vector<SourceBreakdown>>>&
        models) {
  if (models.empty()) return "";
  const std::vector<SourceBreakdown>& sources = models.front().second;
  for (const auto& [name, breakdown] : models) {
    if (breakdown.size() != sources.size()) {
      throw DataError("model '" + name + "' covers a different source list");
    }
  }

  std::size_t model_width = std::string("Model").size();
  for (const auto& [name, breakdown] : models) {
    model_width = std::max(model_width, name.size());
  }
  std::vector<std::string> headers;
  for (const SourceBreakdown& source : sources) {
    char annotation[64];
    std::snprintf(annotation, sizeof(annotation), "%s (l=%.0f)",
                  source.source.c_str(), source.mean_length_s);
    headers.emplace_back(annotation);
  }

  std::ostringstream out;
  out << pad_right("Model", model_width);
  for (const std::string& header : headers) out << "  " << header;
  out << "\n";
  for (const auto& [name, breakdown] : models) {
    out << pad_right(name, model_width);
    for (std::size_t s = 0; s < breakdown.size(); ++s) {
      out << "  " << pad_left(format2(breakdown[s].micro_f1),
                              headers[s].size());
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ecgbench::evalkit
