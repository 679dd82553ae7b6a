#include "ecgbench/neural/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ecgbench/errors.hpp"

namespace ecgbench::neural {

std::vector<double> gradcam1d(Model& model, const Tensor& example,
                              std::size_t class_index) {
  if (example.batch != 1) {
    throw ShapeError("activation maps are computed one record at a time");
  }
  if (class_index >= model.num_classes) {
    throw IndexError("class index " + std::to_string(class_index) +
                     " out of range for " + std::to_string(model.num_classes) +
                     " classes");
  }

  int conv_index = -1;
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    const LayerConfig& cfg = model.layers[i].cfg;
    if (cfg.kind == LayerKind::conv1d && !cfg.is_projection) {
      conv_index = static_cast<int>(i);
      break;
    }
  }
  if (conv_index < 0) {
    throw ShapeError("model has no convolution layer to map");
  }

  ForwardCache cache;
  const Tensor logits = forward_pass(model, example, Mode::eval, nullptr,
                                     &cache);

  Tensor seed = Tensor::zeros(logits.batch, logits.channels, logits.length);
  seed.at(0, class_index, 0) = 1.0;
  std::vector<Tensor> node_grads;
  backward_pass(model, cache, example, seed, &node_grads);

  const Tensor& activation = cache.outputs[static_cast<std::size_t>(conv_index)];
  const Tensor& upstream = node_grads[static_cast<std::size_t>(conv_index)];
  const std::size_t map_len = activation.length;

  std::vector<double> cam(map_len, 0.0);
  if (!upstream.data.empty()) {
    const double inv = 1.0 / static_cast<double>(map_len);
    for (std::size_t c = 0; c < activation.channels; ++c) {
      const double* grad_row = upstream.row(0, c);
      double weight = 0.0;
      for (std::size_t t = 0; t < map_len; ++t) weight += grad_row[t];
      weight *= inv;
      const double* act_row = activation.row(0, c);
      for (std::size_t t = 0; t < map_len; ++t) {
        cam[t] += weight * act_row[t];
      }
    }
  }
  for (double& v : cam) v = std::max(v, 0.0);

  // Linear resampling onto the input grid with aligned endpoints.
  const std::size_t out_len = example.length;
  std::vector<double> heatmap(out_len, 0.0);
  if (map_len == 1 || out_len == 1) {
    std::fill(heatmap.begin(), heatmap.end(), cam[0]);
  } else {
    const double step = static_cast<double>(map_len - 1) /
                        static_cast<double>(out_len - 1);
    for (std::size_t i = 0; i < out_len; ++i) {
      const double pos = static_cast<double>(i) * step;
      const std::size_t lo =
          std::min(static_cast<std::size_t>(pos), map_len - 2);
      const double frac = pos - static_cast<double>(lo);
      heatmap[i] = cam[lo] * (1.0 - frac) + cam[lo + 1] * frac;
    }
  }

  const double peak = *std::max_element(heatmap.begin(), heatmap.end());
  if (peak > 0.0) {
    for (double& v : heatmap) v /= peak;
  }
  return heatmap;
}

}  // namespace ecgbench::neural
