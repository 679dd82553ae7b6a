#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ecgbench::neural {

enum class LayerKind {
  conv1d,
  batchnorm1d,
  relu,
  maxpool1d,
  avgpool1d,
  dropout,
  dense,
  add_residual,
  concat_pool,
  flatten,
};

enum class Padding { valid, same };

std::string layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

// Static description of one node in the layer graph.  `input` is the index
// of the node whose output feeds this node (-1 means the model input);
// `skip` is the second operand of add_residual nodes (-1 otherwise).
struct LayerConfig {
  LayerKind kind = LayerKind::relu;

  // conv1d
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  Padding padding = Padding::valid;
  bool is_projection = false;  // shortcut-path conv, skipped by saliency maps

  // maxpool1d / avgpool1d
  std::size_t pool_size = 0;
  std::size_t pool_stride = 0;

  // dropout
  double drop_probability = 0.0;

  // batchnorm1d
  double momentum = 0.99;
  double epsilon = 1e-5;

  // dense
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  int input = -1;
  int skip = -1;
};

// A node plus its learnable state.  `weights`/`bias` hold the conv or dense
// parameters (batchnorm stores gamma in `weights` and beta in `bias`);
// running statistics are used by batchnorm in inference mode.
struct Layer {
  LayerConfig cfg;
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  bool has_parameters() const {
    return cfg.kind == LayerKind::conv1d || cfg.kind == LayerKind::dense ||
           cfg.kind == LayerKind::batchnorm1d;
  }
};

// Output length of a 1-D convolution; throws ShapeError when the window does
// not fit (valid padding only).
std::size_t conv_output_length(std::size_t input_length, std::size_t kernel,
                               std::size_t stride, Padding padding);

// Output length of a pooling window; throws ShapeError when the window does
// not fit.
std::size_t pool_output_length(std::size_t input_length, std::size_t window,
                               std::size_t stride);

}  // namespace ecgbench::neural
