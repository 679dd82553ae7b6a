#include <benchmark/benchmark.h>

#include "ecgbench/dsp.hpp"
#include "ecgbench/util/rng.hpp"

namespace {

ecgbench::Signal noisy_signal(std::size_t length, int rate_hz) {
  ecgbench::Rng rng(42);
  ecgbench::Signal signal;
  signal.sampling_rate_hz = rate_hz;
  signal.samples.resize(length);
  for (double& sample : signal.samples) sample = rng.normal();
  return signal;
}

void BM_BandpassFilter(benchmark::State& state) {
  const ecgbench::Signal signal =
      noisy_signal(static_cast<std::size_t>(state.range(0)), 300);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ecgbench::dsp::bandpass_filter(signal));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BandpassFilter)->Arg(3000)->Arg(9000)->Arg(18000);

void BM_ResampleLinear(benchmark::State& state) {
  const ecgbench::Signal signal =
      noisy_signal(static_cast<std::size_t>(state.range(0)), 500);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ecgbench::dsp::resample_linear(signal, 300));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResampleLinear)->Arg(5000)->Arg(30000);

void BM_Standardize(benchmark::State& state) {
  const ecgbench::Signal signal =
      noisy_signal(static_cast<std::size_t>(state.range(0)), 300);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ecgbench::dsp::standardize(signal));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Standardize)->Arg(18000);

}  // namespace
