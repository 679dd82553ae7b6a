#include <benchmark/benchmark.h>

#include "ecgbench/tsfeat/features.hpp"
#include "ecgbench/tsfeat/spec.hpp"
#include "ecgbench/util/rng.hpp"

namespace {

std::vector<double> random_series(std::size_t length) {
  ecgbench::Rng rng(11);
  std::vector<double> series(length);
  for (double& value : series) value = rng.normal();
  return series;
}

void BM_FullFeatureGrid(benchmark::State& state) {
  ecgbench::Signal lead;
  lead.sampling_rate_hz = 300;
  lead.samples = random_series(static_cast<std::size_t>(state.range(0)));
  const std::vector<ecgbench::tsfeat::FeatureSpec> specs =
      ecgbench::tsfeat::default_specs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ecgbench::tsfeat::extract_all({lead}, specs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullFeatureGrid)->Arg(512)->Arg(2048)->Arg(9000);

void BM_SpectrumOnly(benchmark::State& state) {
  const std::vector<double> series =
      random_series(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    ecgbench::tsfeat::SeriesContext context(series);
    benchmark::DoNotOptimize(context.spectrum());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpectrumOnly)->Arg(2048)->Arg(9000);

}  // namespace
