#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace ecgbench::evalkit {

// Per-record average stage durations; total is the exact sum of the stage
// means, so rendered rows always satisfy processing + prediction = total.
struct TimingReport {
  double processing_ms = 0.0;
  double prediction_ms = 0.0;
  double total_ms = 0.0;
  std::size_t records = 0;
  std::size_t repetitions = 0;  // measured repetitions (warm-up excluded)
};

// Runs `processing(record)` then `prediction(record)` for every record,
// `repetitions` times (>= 3), on a monotonic clock.  The first repetition
// is discarded as warm-up; the rest average into per-record stage means.
// Throws DataError when there are no records and ConfigError when
// repetitions < 3.
TimingReport time_pipeline(const std::function<void(std::size_t)>& processing,
                           const std::function<void(std::size_t)>& prediction,
                           std::size_t num_records, std::size_t repetitions);

// Aligned text table of one row per (name, report) pair with columns
// Model / Processing (ms) / Prediction (ms) / Total (ms) at one decimal.
std::string render_timing_table(
    const std::vector<std::pair<std::string, TimingReport>>& rows);

}  // namespace ecgbench::evalkit
