#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgbench/neural/model.hpp"

namespace testsupport {

// Learnable scalars of the model in a fixed order (per layer: weights then
// bias; batchnorm contributes gamma/beta, never the running statistics).
std::vector<double*> parameter_pointers(ecgbench::neural::Model& model);

// Loss used by all gradient checks: mean sigmoid cross-entropy of the model
// output against `targets`.  Every call draws dropout masks from a freshly
// seeded generator, so repeated evaluations are exact replays and central
// differences are well defined even in training mode.
double loss_value(ecgbench::neural::Model& model,
                  const ecgbench::neural::Tensor& input,
                  const ecgbench::neural::Tensor& targets,
                  ecgbench::neural::Mode mode, std::uint64_t dropout_seed);

// Reverse-mode gradient of the same loss, flattened in parameter_pointers
// order.  When `input_grad` is non-null the gradient with respect to the
// input tensor is stored there.
std::vector<double> analytic_gradient(ecgbench::neural::Model& model,
                                      const ecgbench::neural::Tensor& input,
                                      const ecgbench::neural::Tensor& targets,
                                      ecgbench::neural::Mode mode,
                                      std::uint64_t dropout_seed,
                                      ecgbench::neural::Tensor* input_grad = nullptr);

struct GradCheckResult {
  std::size_t checks = 0;
  double max_rel_error = 0.0;
  std::string worst;  // where the largest discrepancy occurred
};

// Central finite differences on every parameter coordinate and every input
// coordinate.  Intended for small hand-built models; cost is two forward
// passes per coordinate.
GradCheckResult check_gradients_exhaustive(ecgbench::neural::Model& model,
                                           const ecgbench::neural::Tensor& input,
                                           const ecgbench::neural::Tensor& targets,
                                           ecgbench::neural::Mode mode,
                                           double epsilon = 1e-5,
                                           std::uint64_t dropout_seed = 77);

// Directional derivatives along random unit directions of the full parameter
// vector: <grad, v> versus (L(theta + eps v) - L(theta - eps v)) / (2 eps).
// Scales to full architectures where per-coordinate differencing would not.
GradCheckResult check_gradients_directional(ecgbench::neural::Model& model,
                                            const ecgbench::neural::Tensor& input,
                                            const ecgbench::neural::Tensor& targets,
                                            ecgbench::neural::Mode mode,
                                            std::size_t directions = 20,
                                            double epsilon = 1e-5,
                                            std::uint64_t seed = 99,
                                            std::uint64_t dropout_seed = 77);

// Random batch with entries ~ N(0, scale^2) and random multi-hot targets.
ecgbench::neural::Tensor random_batch(std::size_t batch, std::size_t channels,
                                      std::size_t length, std::uint64_t seed,
                                      double scale = 1.0);
ecgbench::neural::Tensor random_targets(std::size_t batch, std::size_t classes,
                                        std::uint64_t seed);

struct GradBatteryResult {
  std::size_t models_checked = 0;
  std::size_t checks = 0;
  double max_rel_error = 0.0;
  std::string worst;
};

// Exhaustive checks on small models covering every layer kind (convolution
// in valid/same/strided/projection form, batchnorm in both modes, relu,
// both pool kinds, dropout in training mode, dense, residual add, global
// concat pooling, flatten), followed by directional checks on two-block
// versions of both full architectures at input length 64.
GradBatteryResult run_gradcheck_battery(std::uint64_t seed, double epsilon = 1e-5);

}  // namespace testsupport
