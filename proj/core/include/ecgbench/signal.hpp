#pragma once

#include <vector>

namespace ecgbench {

// One channel of ECG samples in millivolts.
struct Signal {
  std::vector<double> samples;
  int sampling_rate_hz = 0;
};

}  // namespace ecgbench
