#pragma once

#include <cstdint>
#include <vector>

#include "ecgbench/signal.hpp"

namespace testsupport {

// A generated single-lead ECG with its ground truth.
struct SyntheticEcg {
  ecgbench::Signal signal;
  std::vector<std::size_t> peak_indices;  // sample index of each R apex
  double snr_db = 0.0;  // clean-signal power over noise power
};

// Gaussian-wavelet ECG: one R wave (amplitude `amplitude`, sigma 12 ms) per
// beat, a T bump (amplitude 0.25x, sigma 40 ms) 180 ms later, plus white
// noise of standard deviation `noise_sd`. Beat onsets follow `rr_s`; the
// first beat lands 0.5 s into the trace.
SyntheticEcg make_ecg(int sampling_rate_hz, const std::vector<double>& rr_s,
                      double noise_sd, std::uint64_t seed,
                      double amplitude = 1.0);

// RR sequences: a constant train and a linear beats-per-minute sweep.
std::vector<double> constant_rr(double period_s, double duration_s);
std::vector<double> sweep_rr(double bpm_start, double bpm_end,
                             double duration_s);

}  // namespace testsupport
