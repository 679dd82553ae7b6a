#include "ecgbench/neural/layers.hpp"

#include <utility>

#include "ecgbench/errors.hpp"

namespace ecgbench::neural {

namespace {

constexpr std::pair<LayerKind, const char*> kKindNames[] = {
    {LayerKind::conv1d, "conv1d"},
    {LayerKind::batchnorm1d, "batchnorm1d"},
    {LayerKind::relu, "relu"},
    {LayerKind::maxpool1d, "maxpool1d"},
    {LayerKind::avgpool1d, "avgpool1d"},
    {LayerKind::dropout, "dropout"},
    {LayerKind::dense, "dense"},
    {LayerKind::add_residual, "add_residual"},
    {LayerKind::concat_pool, "concat_pool"},
    {LayerKind::flatten, "flatten"},
};

}  // namespace

std::string layer_kind_name(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw FormatError("unknown layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw FormatError("unknown layer kind '" + name + "'");
}

std::size_t conv_output_length(std::size_t input_length, std::size_t kernel,
                               std::size_t stride, Padding padding) {
  if (kernel < 1 || stride < 1) {
    throw ShapeError("convolution kernel and stride must be positive");
  }
  if (padding == Padding::same) {
    return (input_length + stride - 1) / stride;  // ceil(n / stride)
  }
  if (input_length < kernel) {
    throw ShapeError("convolution window of " + std::to_string(kernel) +
                     " does not fit input of length " +
                     std::to_string(input_length));
  }
  return (input_length - kernel) / stride + 1;
}

std::size_t pool_output_length(std::size_t input_length, std::size_t window,
                               std::size_t stride) {
  if (window < 1 || stride < 1) {
    throw ShapeError("pool window and stride must be positive");
  }
  if (input_length < window) {
    throw ShapeError("pool window of " + std::to_string(window) +
                     " does not fit input of length " +
                     std::to_string(input_length));
  }
  return (input_length - window) / stride + 1;
}

}  // namespace ecgbench::neural
