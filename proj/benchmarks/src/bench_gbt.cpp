#include <benchmark/benchmark.h>

#include <string>

#include "ecgbench/gbt/tree.hpp"
#include "ecgbench/tsfeat/matrix.hpp"
#include "ecgbench/util/rng.hpp"

namespace {

void BM_FitTree(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = static_cast<std::size_t>(state.range(1));
  ecgbench::Rng rng(17);
  ecgbench::tsfeat::FeatureMatrix matrix;
  for (std::size_t c = 0; c < cols; ++c) {
    matrix.column_names.push_back("f" + std::to_string(c));
  }
  matrix.rows.assign(rows, std::vector<double>(cols));
  std::vector<double> gradients(rows);
  std::vector<double> hessians(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    matrix.row_ids.push_back("r" + std::to_string(r));
    for (double& cell : matrix.rows[r]) cell = rng.normal();
    gradients[r] = rng.normal();
    hessians[r] = 0.25;
  }
  ecgbench::gbt::TreeConfig config;
  config.max_depth = 6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ecgbench::gbt::fit_tree(gradients, hessians, matrix, config));
  }
  state.SetItemsProcessed(state.iterations() * rows * cols);
}
BENCHMARK(BM_FitTree)->Args({200, 20})->Args({1000, 50})->Args({5000, 100});

}  // namespace
