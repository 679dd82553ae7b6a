#include <benchmark/benchmark.h>

#include <cmath>

#include "ecgbench/dsp.hpp"
#include "ecgbench/hrv/detector.hpp"
#include "ecgbench/util/rng.hpp"

namespace {

// Gaussian R-waves at ~75 bpm over light noise.
ecgbench::Signal synthetic_ecg(double seconds, int rate_hz) {
  ecgbench::Rng rng(7);
  ecgbench::Signal signal;
  signal.sampling_rate_hz = rate_hz;
  signal.samples.assign(static_cast<std::size_t>(seconds * rate_hz), 0.0);
  const double width = 0.012 * rate_hz;
  double beat = 0.4 * rate_hz;
  while (beat < signal.samples.size() - rate_hz / 2) {
    const std::size_t center = static_cast<std::size_t>(beat);
    for (std::size_t i = center > 40 ? center - 40 : 0;
         i < center + 40 && i < signal.samples.size(); ++i) {
      const double d = (static_cast<double>(i) - beat) / width;
      signal.samples[i] += std::exp(-0.5 * d * d);
    }
    beat += (0.8 + 0.04 * rng.uniform()) * rate_hz;
  }
  for (double& sample : signal.samples) sample += 0.02 * rng.normal();
  return signal;
}

void BM_DetectRPeaks(benchmark::State& state) {
  const ecgbench::Signal filtered = ecgbench::dsp::bandpass_filter(
      synthetic_ecg(static_cast<double>(state.range(0)), 300));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ecgbench::hrv::detect_rpeaks(filtered));
  }
  state.SetItemsProcessed(state.iterations() * filtered.samples.size());
}
BENCHMARK(BM_DetectRPeaks)->Arg(10)->Arg(30)->Arg(60);

}  // namespace
