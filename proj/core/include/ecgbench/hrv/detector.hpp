#pragma once

#include <cstddef>
#include <vector>

#include "ecgbench/signal.hpp"

namespace ecgbench::hrv {

// R-peak sample indices over one lead.
struct RPeakList {
  std::vector<std::size_t> indices;  // strictly increasing
  int sampling_rate_hz = 0;
};

// Hamilton-style QRS detector over a band-passed lead. Stages: rectified
// first difference -> 80 ms causal moving-average envelope -> local-maximum
// candidates gated by an adaptive threshold (0.45 x mean of the last 8
// accepted envelope peaks) with a 200 ms refractory -> search-back at half
// threshold when no beat lands within 1.5 x the running mean RR -> fiducial
// refinement to the signal maximum within +-100 ms.
// Signals shorter than 2 s raise LengthError; an input with no qualifying
// peaks yields an empty list.
RPeakList detect_rpeaks(const Signal& filtered);

// Inter-beat intervals in seconds: RR = delta_index / fs, then intervals
// outside [0.3, 2.0] s are dropped, as are intervals deviating more than 20%
// from the running median of the last 5 accepted intervals. Fewer than 3
// peaks raise InsufficientPeaksError.
std::vector<double> to_nn_intervals(const RPeakList& peaks);

}  // namespace ecgbench::hrv
