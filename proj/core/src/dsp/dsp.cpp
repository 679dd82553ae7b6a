#include "ecgbench/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgbench/errors.hpp"

namespace ecgbench::dsp {
namespace {

// Hamming-windowed sinc low-pass, normalized to unity DC gain.
std::vector<double> lowpass_kernel(int taps, double cutoff_hz, double fs) {
  const int m = taps - 1;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    const double x = n - m / 2.0;
    const double arg = 2.0 * cutoff_hz / fs * x;
    double s;
    if (arg == 0.0) {
      s = 1.0;
    } else {
      s = std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    }
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / m);
    h[n] = s * 2.0 * cutoff_hz / fs * window;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

void check_signal(const Signal& signal) {
  if (signal.samples.empty()) throw LengthError("empty signal");
  if (signal.sampling_rate_hz <= 0) {
    throw RangeError("sampling rate must be positive");
  }
}

}  // namespace

std::vector<double> bandpass_kernel(int sampling_rate_hz, double low_hz,
                                    double high_hz) {
  const double fs = sampling_rate_hz;
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || high_hz >= fs / 2.0) {
    throw BandError("band [" + std::to_string(low_hz) + ", " +
                    std::to_string(high_hz) + "] Hz invalid at fs=" +
                    std::to_string(sampling_rate_hz));
  }
  int taps = static_cast<int>(std::lround(301.0 * fs / 300.0));
  if (taps % 2 == 0) ++taps;
  std::vector<double> high = lowpass_kernel(taps, high_hz, fs);
  const std::vector<double> low = lowpass_kernel(taps, low_hz, fs);
  for (int n = 0; n < taps; ++n) high[n] -= low[n];
  return high;
}

Signal bandpass_filter(const Signal& signal, double low_hz, double high_hz) {
  check_signal(signal);
  const std::vector<double> h =
      bandpass_kernel(signal.sampling_rate_hz, low_hz, high_hz);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(signal.samples.size());
  const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(h.size());
  const std::ptrdiff_t delay = (taps - 1) / 2;

  Signal out;
  out.sampling_rate_hz = signal.sampling_rate_hz;
  out.samples.assign(signal.samples.size(), 0.0);
  // y[i] = sum_k h[k] x[i + delay - k], x taken as zero outside its bounds;
  // the +delay shift cancels the filter's group delay.
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t base = i + delay;
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, base - (n - 1));
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(taps - 1, base);
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
      acc += h[static_cast<std::size_t>(k)] *
             signal.samples[static_cast<std::size_t>(base - k)];
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

Signal resample_linear(const Signal& signal, int target_hz) {
  check_signal(signal);
  if (target_hz < 50) throw RangeError("resample target below 50 Hz");
  if (target_hz == signal.sampling_rate_hz) return signal;

  const std::size_t n = signal.samples.size();
  const double ratio =
      static_cast<double>(target_hz) / signal.sampling_rate_hz;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * ratio));

  Signal out;
  out.sampling_rate_hz = target_hz;
  out.samples.resize(std::max<std::size_t>(out_len, 1));
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double pos = static_cast<double>(i) / ratio;
    const std::size_t j = std::min(
        static_cast<std::size_t>(pos), n - 1);
    if (j + 1 >= n) {
      out.samples[i] = signal.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(j);
    out.samples[i] =
        signal.samples[j] * (1.0 - frac) + signal.samples[j + 1] * frac;
  }
  return out;
}

Signal first_difference(const Signal& signal) {
  check_signal(signal);
  if (signal.samples.size() < 2) {
    throw LengthError("first difference needs at least 2 samples");
  }
  Signal out;
  out.sampling_rate_hz = signal.sampling_rate_hz;
  out.samples.resize(signal.samples.size());
  out.samples[0] = 0.0;
  for (std::size_t i = 1; i < signal.samples.size(); ++i) {
    out.samples[i] = signal.samples[i] - signal.samples[i - 1];
  }
  return out;
}

Signal standardize(const Signal& signal) {
  check_signal(signal);
  if (signal.samples.size() < 2) {
    throw LengthError("standardize needs at least 2 samples");
  }
  const double n = static_cast<double>(signal.samples.size());
  double mean = 0.0;
  for (double v : signal.samples) mean += v;
  mean /= n;
  double variance = 0.0;
  for (double v : signal.samples) variance += (v - mean) * (v - mean);
  variance /= n;

  Signal out;
  out.sampling_rate_hz = signal.sampling_rate_hz;
  out.samples.resize(signal.samples.size());
  // Degenerate variance (constant input up to rounding) maps to all zeros.
  if (variance <= 1e-24 * std::max(1.0, mean * mean)) {
    return out;
  }
  const double inv_std = 1.0 / std::sqrt(variance);
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    out.samples[i] = (signal.samples[i] - mean) * inv_std;
  }
  return out;
}

Signal fix_length(const Signal& signal, std::size_t window) {
  check_signal(signal);
  if (window < 1) throw RangeError("window must be at least 1");
  const std::size_t n = signal.samples.size();

  Signal out;
  out.sampling_rate_hz = signal.sampling_rate_hz;
  if (n == window) {
    out.samples = signal.samples;
  } else if (n > window) {
    const std::size_t start = (n - window) / 2;
    out.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       signal.samples.begin() +
                           static_cast<std::ptrdiff_t>(start + window));
  } else {
    const std::size_t left = (window - n) / 2;
    out.samples.assign(window, 0.0);
    std::copy(signal.samples.begin(), signal.samples.end(),
              out.samples.begin() + static_cast<std::ptrdiff_t>(left));
  }
  return out;
}

}  // namespace ecgbench::dsp
