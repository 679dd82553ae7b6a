#pragma once

#include <cstddef>
#include <vector>

#include "ecgbench/signal.hpp"

namespace ecgbench::dsp {

// Linear-phase FIR band-pass (windowed sinc, Hamming window, 301 taps at
// 300 Hz and proportional at other rates). Group delay is compensated, so
// output length equals input length.
Signal bandpass_filter(const Signal& signal, double low_hz = 3.0,
                       double high_hz = 45.0);

// Returns the filter kernel itself; exposed for spectral tests.
std::vector<double> bandpass_kernel(int sampling_rate_hz, double low_hz,
                                    double high_hz);

// Linear interpolation onto a new rate; output length is
// round(len * target / source) and endpoints are preserved (positions past
// the last input sample clamp to it).
Signal resample_linear(const Signal& signal, int target_hz);

// y[0] = 0, y[i] = x[i] - x[i-1]; length preserved.
Signal first_difference(const Signal& signal);

// Zero mean, unit population variance; constant input maps to all zeros.
Signal standardize(const Signal& signal);

// Center-crops longer inputs, zero-pads shorter ones symmetrically (extra
// sample goes to the right). Output length is exactly `window`.
Signal fix_length(const Signal& signal, std::size_t window);

}  // namespace ecgbench::dsp
