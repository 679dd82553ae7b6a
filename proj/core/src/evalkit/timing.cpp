#include "ecgbench/evalkit/timing.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "ecgbench/errors.hpp"

namespace ecgbench::evalkit {

namespace {

std::string format1(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f", value);
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

}  // namespace

TimingReport time_pipeline(const std::function<void(std::size_t)>& processing,
                           const std::function<void(std::size_t)>& prediction,
                           std::size_t num_records, std::size_t repetitions) {
  if (num_records == 0) throw DataError("no records to time");
  if (repetitions < 3) {
    throw ConfigError(
        "timing needs at least 3 repetitions (the first is warm-up)");
  }
  using clock = std::chrono::steady_clock;

  double processing_ns = 0.0;
  double prediction_ns = 0.0;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    double rep_processing_ns = 0.0;
    double rep_prediction_ns = 0.0;
    for (std::size_t record = 0; record < num_records; ++record) {
      const clock::time_point start = clock::now();
      processing(record);
      const clock::time_point middle = clock::now();
      prediction(record);
      const clock::time_point end = clock::now();
      rep_processing_ns += static_cast<double>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(middle - start)
              .count());
      rep_prediction_ns += static_cast<double>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(end - middle)
              .count());
    }
    if (rep == 0) continue;  // warm-up pass: caches, page faults, JIT-y costs
    processing_ns += rep_processing_ns;
    prediction_ns += rep_prediction_ns;
  }

  const double measured =
      static_cast<double>((repetitions - 1) * num_records);
  TimingReport report;
  report.records = num_records;
  report.repetitions = repetitions;
  report.processing_ms = processing_ns / 1e6 / measured;
  report.prediction_ms = prediction_ns / 1e6 / measured;
  report.total_ms = report.processing_ms + report.prediction_ms;
  return report;
}

std::string render_timing_table(
    const std::vector<std::pair<std::string, TimingReport>>& models) {
  static const char* kHeaders[] = {"Processing (ms)", "Prediction (ms)",
                                   "Total (ms)"};
  std::size_t model_width = std::string("Model").size();
  for (const auto& [name, report] : models) {
    model_width = std::max(model_width, name.size());
  }

  std::ostringstream out;
  out << pad_right("Model", model_width);
  for (const char* header : kHeaders) out << "  " << header;
  out << "\n";
  for (const auto& [name, report] : models) {
    const double values[] = {report.processing_ms, report.prediction_ms,
                             report.total_ms};
    out << pad_right(name, model_width);
    for (std::size_t c = 0; c < 3; ++c) {
      out << "  "
          << pad_left(format1(values[c]), std::string(kHeaders[c]).size());
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ecgbench::evalkit
