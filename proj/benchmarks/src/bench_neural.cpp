#include <benchmark/benchmark.h>

#include "ecgbench/neural/model.hpp"
#include "ecgbench/neural/tensor.hpp"
#include "ecgbench/util/rng.hpp"

namespace {

namespace neural = ecgbench::neural;

neural::Tensor random_batch(std::size_t batch, std::size_t length) {
  ecgbench::Rng rng(3);
  neural::Tensor x = neural::Tensor::zeros(batch, 1, length);
  for (double& value : x.data) value = rng.normal();
  return x;
}

void BM_ResNetForward(benchmark::State& state) {
  neural::Model model =
      neural::build_resnet1d(4, 1, static_cast<std::size_t>(state.range(0)));
  ecgbench::Rng rng(5);
  neural::initialize_parameters(model, rng);
  const neural::Tensor x = random_batch(1, 1800);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        neural::forward_pass(model, x, neural::Mode::eval));
  }
}
BENCHMARK(BM_ResNetForward)->Arg(2)->Arg(4);

void BM_ResNetTrainStep(benchmark::State& state) {
  neural::Model model = neural::build_resnet1d(2, 1, 2);
  ecgbench::Rng rng(5);
  neural::initialize_parameters(model, rng);
  const neural::Tensor x = random_batch(8, 1800);
  neural::Tensor targets = neural::Tensor::zeros(8, 2, 1);
  for (std::size_t b = 0; b < 8; ++b) targets.at(b, b % 2, 0) = 1.0;
  ecgbench::Rng dropout(9);
  for (auto _ : state) {
    neural::ForwardCache cache;
    const neural::Tensor logits =
        neural::forward_pass(model, x, neural::Mode::train, &dropout, &cache);
    neural::Tensor grad;
    benchmark::DoNotOptimize(
        neural::bce_with_logits(logits, targets, &grad));
    benchmark::DoNotOptimize(neural::backward_pass(model, cache, x, grad));
  }
}
BENCHMARK(BM_ResNetTrainStep);

void BM_CnnForward(benchmark::State& state) {
  neural::Model model = neural::build_cnn1d(
      4, 18000, 1, static_cast<std::size_t>(state.range(0)));
  ecgbench::Rng rng(5);
  neural::initialize_parameters(model, rng);
  const neural::Tensor x = random_batch(1, 18000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        neural::forward_pass(model, x, neural::Mode::eval));
  }
}
BENCHMARK(BM_CnnForward)->Arg(12);

}  // namespace
