#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgbench/neural/layers.hpp"
#include "ecgbench/neural/tensor.hpp"
#include "ecgbench/util/rng.hpp"

namespace ecgbench::neural {

enum class Mode { train, eval };

// Feed-forward layer graph.  Nodes are stored in topological order: every
// node only consumes outputs of earlier nodes (or the model input).
struct Model {
  std::string architecture;  // "cnn1d" or "resnet1d"
  std::size_t in_channels = 1;
  std::size_t num_classes = 0;
  std::size_t input_length_hint = 0;  // length the dense head was sized for
  std::size_t min_input_length = 0;   // shortest length all windows fit
  std::vector<Layer> layers;

  // Per-layer shapes produced by an input of the given length; throws
  // ShapeError (with the offending node named) when a window does not fit
  // or the dense head sees an unexpected feature count.
  struct Shape {
    std::size_t channels = 0;
    std::size_t length = 0;
  };
  std::vector<Shape> trace_shapes(std::size_t input_length) const;
};

// Activations and bookkeeping recorded during a forward pass so the
// backward pass can be exact.
struct ForwardCache {
  Mode mode = Mode::eval;
  std::vector<Tensor> outputs;                       // one per node
  std::vector<std::vector<std::uint32_t>> argmax;    // maxpool / concat_pool
  std::vector<std::vector<double>> batch_mean;       // batchnorm, per channel
  std::vector<std::vector<double>> batch_ivar;       // 1/sqrt(var + eps)
  std::vector<std::vector<double>> dropout_scale;    // 0 or 1/(1-p), per value
};

// Runs the graph.  In training mode batchnorm uses batch statistics (and
// updates the running ones) and dropout draws a fresh mask from
// `dropout_rng`; in inference mode both are deterministic.  When `cache` is
// non-null all intermediate state needed by backward() is recorded.
Tensor forward_pass(Model& model, const Tensor& input, Mode mode,
                    Rng* dropout_rng = nullptr,
                    ForwardCache* cache = nullptr);

// Parameter gradients mirroring Layer::weights / Layer::bias, plus the
// gradient with respect to the model input.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
  Tensor input;
};

// Exact reverse-mode differentiation through the cached forward pass.
// `output_grad` is dLoss/dOutput for the final node.  When `node_grads` is
// non-null the gradient flowing out of every node is retained (used by the
// saliency-map code).
Gradients backward_pass(const Model& model, const ForwardCache& cache,
                        const Tensor& input, const Tensor& output_grad,
                        std::vector<Tensor>* node_grads = nullptr);

// Draws fan-in-scaled uniform weights for conv/dense layers and resets
// batchnorm to identity (gamma 1, beta 0, running mean 0, running var 1).
void initialize_parameters(Model& model, Rng& rng);

// 12-block plain convolutional network: each block is
// conv(valid, stride 1) -> batchnorm -> relu -> maxpool(2,2) -> dropout(0.3)
// with kernel sizes [20,5,5,5,5,5,3,3,3,3,3,3] and channel widths
// [256,256,128,128,128,64,64,64,32,32,32,32], followed by
// avgpool(1, stride 2) -> flatten -> dense(num_classes).  `blocks` may be
// lowered to build a shallow variant with the leading schedule entries.
Model build_cnn1d(std::size_t num_classes, std::size_t input_length = 18000,
                  std::size_t in_leads = 1, std::size_t blocks = 12);

// Residual network: stem conv(k15, 64, same) -> batchnorm -> relu ->
// maxpool(2,2), then residual blocks of widths [64,128,192,256] whose main
// path is conv(same, k7) -> batchnorm -> relu -> dropout(0.3) ->
// conv(same, k7) -> batchnorm, with a relu after the residual add.  Blocks
// after the first halve the length (stride 2) and project the shortcut with
// a kernel-1 conv.  Head: concatenated global average/max pool -> dense.
Model build_resnet1d(std::size_t num_classes, std::size_t in_leads = 1,
                     std::size_t blocks = 4);

// Mean sigmoid cross-entropy between logits and multi-hot targets, both
// shaped (batch, classes, 1).  When `grad` is non-null it receives
// dLoss/dLogits of the same shape.
double bce_with_logits(const Tensor& logits, const Tensor& targets,
                       Tensor* grad = nullptr);

}  // namespace ecgbench::neural
