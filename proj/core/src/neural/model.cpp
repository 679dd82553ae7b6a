#include "ecgbench/neural/model.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "ecgbench/errors.hpp"

extern "C" void openblas_set_num_threads(int);

namespace ecgbench::neural {

namespace {

// The matrix kernels must not spawn worker threads: results would depend on
// the reduction split, breaking bit-reproducibility between runs.
void ensure_single_threaded_blas() {
  static const bool once = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)once;
}

struct ConvShape {
  std::size_t out_len = 0;
  std::size_t pad_left = 0;
};

ConvShape conv_shape(std::size_t length, const LayerConfig& cfg) {
  ConvShape s;
  s.out_len = conv_output_length(length, cfg.kernel, cfg.stride, cfg.padding);
  if (cfg.padding == Padding::same) {
    const std::size_t span = (s.out_len - 1) * cfg.stride + cfg.kernel;
    if (span > length) s.pad_left = (span - length) / 2;
  }
  return s;
}

// Expands one record's (in_ch, length) activation into the
// (in_ch * kernel) x out_len patch matrix used by the matrix-multiply
// convolution.  Out-of-range positions (same padding) become zeros.
void im2col(const double* x, std::size_t in_ch, std::size_t length,
            std::size_t kernel, std::size_t stride, std::size_t pad_left,
            std::size_t out_len, double* col) {
  const auto len = static_cast<std::ptrdiff_t>(length);
  for (std::size_t ic = 0; ic < in_ch; ++ic) {
    const double* src = x + ic * length;
    for (std::size_t kk = 0; kk < kernel; ++kk) {
      double* dst = col + (ic * kernel + kk) * out_len;
      const auto offset = static_cast<std::ptrdiff_t>(kk) -
                          static_cast<std::ptrdiff_t>(pad_left);
      if (stride == 1) {
        const std::size_t t0 =
            offset < 0 ? static_cast<std::size_t>(-offset) : 0;
        const std::size_t t1 =
            offset >= len
                ? 0
                : std::min(out_len, static_cast<std::size_t>(len - offset));
        std::fill(dst, dst + std::min(t0, out_len), 0.0);
        if (t1 > t0) {
          std::memcpy(dst + t0, src + static_cast<std::ptrdiff_t>(t0) + offset,
                      (t1 - t0) * sizeof(double));
        }
        std::fill(dst + std::max(t0, t1), dst + out_len, 0.0);
      } else {
        for (std::size_t t = 0; t < out_len; ++t) {
          const auto idx = static_cast<std::ptrdiff_t>(t * stride) + offset;
          dst[t] = (idx >= 0 && idx < len) ? src[idx] : 0.0;
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds patch-matrix gradients back onto the
// (in_ch, length) input gradient.
void col2im_add(const double* col, std::size_t in_ch, std::size_t length,
                std::size_t kernel, std::size_t stride, std::size_t pad_left,
                std::size_t out_len, double* dx) {
  const auto len = static_cast<std::ptrdiff_t>(length);
  for (std::size_t ic = 0; ic < in_ch; ++ic) {
    double* dst = dx + ic * length;
    for (std::size_t kk = 0; kk < kernel; ++kk) {
      const double* src = col + (ic * kernel + kk) * out_len;
      const auto offset = static_cast<std::ptrdiff_t>(kk) -
                          static_cast<std::ptrdiff_t>(pad_left);
      if (stride == 1) {
        const std::size_t t0 =
            offset < 0 ? static_cast<std::size_t>(-offset) : 0;
        const std::size_t t1 =
            offset >= len
                ? 0
                : std::min(out_len, static_cast<std::size_t>(len - offset));
        double* out = dst + offset;
        for (std::size_t t = t0; t < t1; ++t) out[t] += src[t];
      } else {
        for (std::size_t t = 0; t < out_len; ++t) {
          const auto idx = static_cast<std::ptrdiff_t>(t * stride) + offset;
          if (idx >= 0 && idx < len) dst[idx] += src[t];
        }
      }
    }
  }
}

void check_channels(const LayerConfig& cfg, const Tensor& src) {
  if (src.channels != cfg.in_channels) {
    throw ShapeError("expected " + std::to_string(cfg.in_channels) +
                     " input channels, got " + std::to_string(src.channels));
  }
}

Tensor conv_forward(const Layer& layer, const Tensor& src,
                    std::vector<double>& col) {
  const LayerConfig& cfg = layer.cfg;
  check_channels(cfg, src);
  const ConvShape geo = conv_shape(src.length, cfg);
  const std::size_t patch = cfg.in_channels * cfg.kernel;
  Tensor out = Tensor::zeros(src.batch, cfg.out_channels, geo.out_len);
  col.resize(patch * geo.out_len);
  for (std::size_t b = 0; b < src.batch; ++b) {
    im2col(src.row(b, 0), cfg.in_channels, src.length, cfg.kernel, cfg.stride,
           geo.pad_left, geo.out_len, col.data());
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans,
                static_cast<int>(cfg.out_channels),
                static_cast<int>(geo.out_len), static_cast<int>(patch), 1.0,
                layer.weights.data(), static_cast<int>(patch), col.data(),
                static_cast<int>(geo.out_len), 0.0, out.row(b, 0),
                static_cast<int>(geo.out_len));
    for (std::size_t oc = 0; oc < cfg.out_channels; ++oc) {
      double* row = out.row(b, oc);
      const double bias = layer.bias[oc];
      for (std::size_t t = 0; t < geo.out_len; ++t) row[t] += bias;
    }
  }
  return out;
}

Tensor batchnorm_forward(Layer& layer, const Tensor& src, Mode mode,
                         std::vector<double>& mean_cache,
                         std::vector<double>& ivar_cache) {
  const LayerConfig& cfg = layer.cfg;
  if (src.channels != layer.weights.size()) {
    throw ShapeError("expected " + std::to_string(layer.weights.size()) +
                     " input channels, got " + std::to_string(src.channels));
  }
  const std::size_t count = src.batch * src.length;
  Tensor out = Tensor::zeros(src.batch, src.channels, src.length);
  mean_cache.resize(src.channels);
  ivar_cache.resize(src.channels);
  for (std::size_t c = 0; c < src.channels; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::train) {
      for (std::size_t b = 0; b < src.batch; ++b) {
        const double* row = src.row(b, c);
        for (std::size_t t = 0; t < src.length; ++t) mean += row[t];
      }
      mean /= static_cast<double>(count);
      for (std::size_t b = 0; b < src.batch; ++b) {
        const double* row = src.row(b, c);
        for (std::size_t t = 0; t < src.length; ++t) {
          const double d = row[t] - mean;
          var += d * d;
        }
      }
      var /= static_cast<double>(count);
      layer.running_mean[c] =
          cfg.momentum * layer.running_mean[c] + (1.0 - cfg.momentum) * mean;
      layer.running_var[c] =
          cfg.momentum * layer.running_var[c] + (1.0 - cfg.momentum) * var;
    } else {
      mean = layer.running_mean[c];
      var = layer.running_var[c];
    }
    const double ivar = 1.0 / std::sqrt(var + cfg.epsilon);
    mean_cache[c] = mean;
    ivar_cache[c] = ivar;
    const double gamma = layer.weights[c];
    const double beta = layer.bias[c];
    const double scale = gamma * ivar;
    const double shift = beta - mean * scale;
    for (std::size_t b = 0; b < src.batch; ++b) {
      const double* in = src.row(b, c);
      double* dst = out.row(b, c);
      for (std::size_t t = 0; t < src.length; ++t) {
        dst[t] = in[t] * scale + shift;
      }
    }
  }
  return out;
}

Tensor relu_forward(const Tensor& src) {
  Tensor out = src;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor maxpool_forward(const LayerConfig& cfg, const Tensor& src,
                       std::vector<std::uint32_t>& argmax) {
  const std::size_t out_len =
      pool_output_length(src.length, cfg.pool_size, cfg.pool_stride);
  Tensor out = Tensor::zeros(src.batch, src.channels, out_len);
  argmax.resize(src.batch * src.channels * out_len);
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < src.batch; ++b) {
    for (std::size_t c = 0; c < src.channels; ++c) {
      const double* row = src.row(b, c);
      double* dst = out.row(b, c);
      for (std::size_t t = 0; t < out_len; ++t) {
        const std::size_t start = t * cfg.pool_stride;
        std::size_t best = start;
        double value = row[start];
        for (std::size_t k = 1; k < cfg.pool_size; ++k) {
          if (row[start + k] > value) {
            value = row[start + k];
            best = start + k;
          }
        }
        dst[t] = value;
        argmax[cursor++] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return out;
}

Tensor avgpool_forward(const LayerConfig& cfg, const Tensor& src) {
  const std::size_t out_len =
      pool_output_length(src.length, cfg.pool_size, cfg.pool_stride);
  Tensor out = Tensor::zeros(src.batch, src.channels, out_len);
  const double inv = 1.0 / static_cast<double>(cfg.pool_size);
  for (std::size_t b = 0; b < src.batch; ++b) {
    for (std::size_t c = 0; c < src.channels; ++c) {
      const double* row = src.row(b, c);
      double* dst = out.row(b, c);
      for (std::size_t t = 0; t < out_len; ++t) {
        const std::size_t start = t * cfg.pool_stride;
        double sum = 0.0;
        for (std::size_t k = 0; k < cfg.pool_size; ++k) sum += row[start + k];
        dst[t] = sum * inv;
      }
    }
  }
  return out;
}

Tensor dropout_forward(const LayerConfig& cfg, const Tensor& src, Mode mode,
                       Rng* rng, std::vector<double>& scale_cache) {
  if (mode == Mode::eval || cfg.drop_probability <= 0.0) {
    return src;
  }
  if (rng == nullptr) {
    throw ConfigError("training-mode dropout needs a random stream");
  }
  const double keep_scale = 1.0 / (1.0 - cfg.drop_probability);
  Tensor out = src;
  scale_cache.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double scale =
        rng->uniform() < cfg.drop_probability ? 0.0 : keep_scale;
    scale_cache[i] = scale;
    out.data[i] *= scale;
  }
  return out;
}

Tensor dense_forward(const Layer& layer, const Tensor& src) {
  const LayerConfig& cfg = layer.cfg;
  const std::size_t features = src.channels * src.length;
  if (features != cfg.in_features) {
    throw ShapeError("dense layer expected " + std::to_string(cfg.in_features) +
                     " input features, got " + std::to_string(features));
  }
  Tensor out = Tensor::zeros(src.batch, cfg.out_features, 1);
  for (std::size_t b = 0; b < src.batch; ++b) {
    const double* x = src.row(b, 0);
    for (std::size_t o = 0; o < cfg.out_features; ++o) {
      const double* w = layer.weights.data() + o * cfg.in_features;
      double sum = layer.bias[o];
      for (std::size_t f = 0; f < features; ++f) sum += w[f] * x[f];
      out.at(b, o, 0) = sum;
    }
  }
  return out;
}

Tensor add_forward(const Tensor& main_in, const Tensor& skip_in) {
  if (!main_in.same_shape(skip_in)) {
    throw ShapeError("residual operands differ: (" +
                     std::to_string(main_in.channels) + "," +
                     std::to_string(main_in.length) + ") vs (" +
                     std::to_string(skip_in.channels) + "," +
                     std::to_string(skip_in.length) + ")");
  }
  Tensor out = main_in;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += skip_in.data[i];
  return out;
}

Tensor concat_pool_forward(const Tensor& src,
                           std::vector<std::uint32_t>& argmax) {
  if (src.length < 1) throw ShapeError("global pooling over empty length");
  Tensor out = Tensor::zeros(src.batch, 2 * src.channels, 1);
  argmax.resize(src.batch * src.channels);
  const double inv = 1.0 / static_cast<double>(src.length);
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < src.batch; ++b) {
    for (std::size_t c = 0; c < src.channels; ++c) {
      const double* row = src.row(b, c);
      double sum = row[0];
      double best = row[0];
      std::size_t best_at = 0;
      for (std::size_t t = 1; t < src.length; ++t) {
        sum += row[t];
        if (row[t] > best) {
          best = row[t];
          best_at = t;
        }
      }
      out.at(b, c, 0) = sum * inv;
      out.at(b, src.channels + c, 0) = best;
      argmax[cursor++] = static_cast<std::uint32_t>(best_at);
    }
  }
  return out;
}

Tensor flatten_forward(const Tensor& src) {
  Tensor out;
  out.batch = src.batch;
  out.channels = src.channels * src.length;
  out.length = 1;
  out.data = src.data;
  return out;
}

[[noreturn]] void rethrow_with_layer(std::size_t index, LayerKind kind,
                                     const ShapeError& e) {
  throw ShapeError("layer " + std::to_string(index) + " (" +
                   layer_kind_name(kind) + "): " + e.what());
}

Layer make_layer(const LayerConfig& cfg) {
  Layer layer;
  layer.cfg = cfg;
  switch (cfg.kind) {
    case LayerKind::conv1d:
      layer.weights.assign(cfg.out_channels * cfg.in_channels * cfg.kernel,
                           0.0);
      layer.bias.assign(cfg.out_channels, 0.0);
      break;
    case LayerKind::dense:
      layer.weights.assign(cfg.out_features * cfg.in_features, 0.0);
      layer.bias.assign(cfg.out_features, 0.0);
      break;
    case LayerKind::batchnorm1d:
      layer.weights.assign(cfg.out_channels, 1.0);
      layer.bias.assign(cfg.out_channels, 0.0);
      layer.running_mean.assign(cfg.out_channels, 0.0);
      layer.running_var.assign(cfg.out_channels, 1.0);
      break;
    default:
      break;
  }
  return layer;
}

// Length-only walk of the layer graph: true when every convolution and
// pooling window fits an input of the given length (the dense head's
// feature count is deliberately ignored — it pins one specific length).
bool windows_fit(const Model& model, std::size_t input_length) {
  std::vector<std::size_t> lengths(model.layers.size(), 0);
  try {
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      const LayerConfig& cfg = model.layers[i].cfg;
      const std::size_t src =
          cfg.input < 0 ? input_length
                        : lengths[static_cast<std::size_t>(cfg.input)];
      switch (cfg.kind) {
        case LayerKind::conv1d:
          lengths[i] = conv_shape(src, cfg).out_len;
          break;
        case LayerKind::maxpool1d:
        case LayerKind::avgpool1d:
          lengths[i] =
              pool_output_length(src, cfg.pool_size, cfg.pool_stride);
          break;
        case LayerKind::dense:
        case LayerKind::flatten:
        case LayerKind::concat_pool:
          if (src < 1) return false;
          lengths[i] = 1;
          break;
        case LayerKind::add_residual: {
          if (cfg.skip < 0) return false;
          if (src != lengths[static_cast<std::size_t>(cfg.skip)]) return false;
          lengths[i] = src;
          break;
        }
        default:
          lengths[i] = src;
          break;
      }
    }
  } catch (const ShapeError&) {
    return false;
  }
  return true;
}

std::size_t min_admissible_length(const Model& model) {
  std::size_t hi = 1;
  while (!windows_fit(model, hi)) {
    hi *= 2;
    if (hi > (std::size_t{1} << 24)) {
      throw ShapeError("no admissible input length below 2^24");
    }
  }
  std::size_t lo = 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (windows_fit(model, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

}  // namespace

std::vector<Model::Shape> Model::trace_shapes(std::size_t input_length) const {
  std::vector<Shape> shapes(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerConfig& cfg = layers[i].cfg;
    const Shape src = cfg.input < 0
                          ? Shape{in_channels, input_length}
                          : shapes[static_cast<std::size_t>(cfg.input)];
    try {
      switch (cfg.kind) {
        case LayerKind::conv1d: {
          if (src.channels != cfg.in_channels) {
            throw ShapeError("expected " + std::to_string(cfg.in_channels) +
                             " input channels, got " +
                             std::to_string(src.channels));
          }
          shapes[i] = {cfg.out_channels, conv_shape(src.length, cfg).out_len};
          break;
        }
        case LayerKind::batchnorm1d:
          if (src.channels != cfg.out_channels) {
            throw ShapeError("expected " + std::to_string(cfg.out_channels) +
                             " input channels, got " +
                             std::to_string(src.channels));
          }
          shapes[i] = src;
          break;
        case LayerKind::relu:
        case LayerKind::dropout:
          shapes[i] = src;
          break;
        case LayerKind::maxpool1d:
        case LayerKind::avgpool1d:
          shapes[i] = {src.channels, pool_output_length(src.length,
                                                        cfg.pool_size,
                                                        cfg.pool_stride)};
          break;
        case LayerKind::dense: {
          const std::size_t features = src.channels * src.length;
          if (features != cfg.in_features) {
            throw ShapeError("dense layer expected " +
                             std::to_string(cfg.in_features) +
                             " input features, got " +
                             std::to_string(features));
          }
          shapes[i] = {cfg.out_features, 1};
          break;
        }
        case LayerKind::add_residual: {
          if (cfg.skip < 0) {
            throw ShapeError("residual add is missing its skip input");
          }
          const Shape other = shapes[static_cast<std::size_t>(cfg.skip)];
          if (src.channels != other.channels || src.length != other.length) {
            throw ShapeError("residual operands differ: (" +
                             std::to_string(src.channels) + "," +
                             std::to_string(src.length) + ") vs (" +
                             std::to_string(other.channels) + "," +
                             std::to_string(other.length) + ")");
          }
          shapes[i] = src;
          break;
        }
        case LayerKind::concat_pool:
          if (src.length < 1) {
            throw ShapeError("global pooling over empty length");
          }
          shapes[i] = {2 * src.channels, 1};
          break;
        case LayerKind::flatten:
          shapes[i] = {src.channels * src.length, 1};
          break;
      }
    } catch (const ShapeError& e) {
      rethrow_with_layer(i, cfg.kind, e);
    }
  }
  return shapes;
}

Tensor forward_pass(Model& model, const Tensor& input, Mode mode,
                    Rng* dropout_rng, ForwardCache* cache) {
  ensure_single_threaded_blas();
  const std::size_t n = model.layers.size();
  if (n == 0) throw ShapeError("model has no layers");
  if (input.batch < 1 || input.length < 1) {
    throw ShapeError("input batch and length must be positive");
  }
  if (input.channels != model.in_channels) {
    throw ShapeError("model expects " + std::to_string(model.in_channels) +
                     " input channels, got " + std::to_string(input.channels));
  }

  std::vector<Tensor> outputs(n);
  std::vector<std::vector<std::uint32_t>> argmax(n);
  std::vector<std::vector<double>> batch_mean(n);
  std::vector<std::vector<double>> batch_ivar(n);
  std::vector<std::vector<double>> dropout_scale(n);
  std::vector<double> col;  // conv scratch, reused across layers

  for (std::size_t i = 0; i < n; ++i) {
    Layer& layer = model.layers[i];
    const LayerConfig& cfg = layer.cfg;
    const Tensor& src = cfg.input < 0
                            ? input
                            : outputs[static_cast<std::size_t>(cfg.input)];
    try {
      switch (cfg.kind) {
        case LayerKind::conv1d:
          outputs[i] = conv_forward(layer, src, col);
          break;
        case LayerKind::batchnorm1d:
          outputs[i] =
              batchnorm_forward(layer, src, mode, batch_mean[i], batch_ivar[i]);
          break;
        case LayerKind::relu:
          outputs[i] = relu_forward(src);
          break;
        case LayerKind::maxpool1d:
          outputs[i] = maxpool_forward(cfg, src, argmax[i]);
          break;
        case LayerKind::avgpool1d:
          outputs[i] = avgpool_forward(cfg, src);
          break;
        case LayerKind::dropout:
          outputs[i] =
              dropout_forward(cfg, src, mode, dropout_rng, dropout_scale[i]);
          break;
        case LayerKind::dense:
          outputs[i] = dense_forward(layer, src);
          break;
        case LayerKind::add_residual: {
          if (cfg.skip < 0) {
            throw ShapeError("residual add is missing its skip input");
          }
          outputs[i] =
              add_forward(src, outputs[static_cast<std::size_t>(cfg.skip)]);
          break;
        }
        case LayerKind::concat_pool:
          outputs[i] = concat_pool_forward(src, argmax[i]);
          break;
        case LayerKind::flatten:
          outputs[i] = flatten_forward(src);
          break;
      }
    } catch (const ShapeError& e) {
      rethrow_with_layer(i, cfg.kind, e);
    }
  }

  Tensor result = outputs.back();
  if (cache != nullptr) {
    cache->mode = mode;
    cache->outputs = std::move(outputs);
    cache->argmax = std::move(argmax);
    cache->batch_mean = std::move(batch_mean);
    cache->batch_ivar = std::move(batch_ivar);
    cache->dropout_scale = std::move(dropout_scale);
  }
  return result;
}

Gradients backward_pass(const Model& model, const ForwardCache& cache,
                        const Tensor& input, const Tensor& output_grad,
                        std::vector<Tensor>* node_grads) {
  ensure_single_threaded_blas();
  const std::size_t n = model.layers.size();
  if (cache.outputs.size() != n) {
    throw ShapeError("forward cache does not match the model");
  }
  if (!output_grad.same_shape(cache.outputs.back())) {
    throw ShapeError("output gradient shape does not match the final layer");
  }

  Gradients grad;
  grad.weights.resize(n);
  grad.bias.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grad.weights[i].assign(model.layers[i].weights.size(), 0.0);
    grad.bias[i].assign(model.layers[i].bias.size(), 0.0);
  }
  grad.input = Tensor::zeros(input.batch, input.channels, input.length);

  std::vector<Tensor> flows(n);
  flows[n - 1] = output_grad;

  auto sink = [&](int target, const Tensor& shape_like) -> Tensor& {
    if (target < 0) return grad.input;
    Tensor& slot = flows[static_cast<std::size_t>(target)];
    if (slot.data.empty()) {
      slot = Tensor::zeros(shape_like.batch, shape_like.channels,
                           shape_like.length);
    }
    return slot;
  };

  std::vector<double> col;
  std::vector<double> dcol;

  for (std::size_t i = n; i-- > 0;) {
    const Tensor& dy = flows[i];
    if (dy.data.empty()) continue;  // node does not reach the output
    const Layer& layer = model.layers[i];
    const LayerConfig& cfg = layer.cfg;
    const Tensor& src = cfg.input < 0
                            ? input
                            : cache.outputs[static_cast<std::size_t>(cfg.input)];
    Tensor& dsrc = sink(cfg.input, src);

    switch (cfg.kind) {
      case LayerKind::conv1d: {
        const ConvShape geo = conv_shape(src.length, cfg);
        const std::size_t patch = cfg.in_channels * cfg.kernel;
        col.resize(patch * geo.out_len);
        dcol.resize(patch * geo.out_len);
        double* gw = grad.weights[i].data();
        double* gb = grad.bias[i].data();
        for (std::size_t b = 0; b < src.batch; ++b) {
          const double* dy_b = dy.row(b, 0);
          im2col(src.row(b, 0), cfg.in_channels, src.length, cfg.kernel,
                 cfg.stride, geo.pad_left, geo.out_len, col.data());
          cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans,
                      static_cast<int>(cfg.out_channels),
                      static_cast<int>(patch), static_cast<int>(geo.out_len),
                      1.0, dy_b, static_cast<int>(geo.out_len), col.data(),
                      static_cast<int>(geo.out_len), 1.0, gw,
                      static_cast<int>(patch));
          for (std::size_t oc = 0; oc < cfg.out_channels; ++oc) {
            const double* row = dy_b + oc * geo.out_len;
            double sum = 0.0;
            for (std::size_t t = 0; t < geo.out_len; ++t) sum += row[t];
            gb[oc] += sum;
          }
          cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans,
                      static_cast<int>(patch), static_cast<int>(geo.out_len),
                      static_cast<int>(cfg.out_channels), 1.0,
                      layer.weights.data(), static_cast<int>(patch), dy_b,
                      static_cast<int>(geo.out_len), 0.0, dcol.data(),
                      static_cast<int>(geo.out_len));
          col2im_add(dcol.data(), cfg.in_channels, src.length, cfg.kernel,
                     cfg.stride, geo.pad_left, geo.out_len, dsrc.row(b, 0));
        }
        break;
      }
      case LayerKind::batchnorm1d: {
        const std::vector<double>& means = cache.batch_mean[i];
        const std::vector<double>& ivars = cache.batch_ivar[i];
        const double m = static_cast<double>(src.batch * src.length);
        for (std::size_t c = 0; c < src.channels; ++c) {
          const double mean = means[c];
          const double ivar = ivars[c];
          const double gamma = layer.weights[c];
          double sum_dy = 0.0;
          double sum_dy_xhat = 0.0;
          for (std::size_t b = 0; b < src.batch; ++b) {
            const double* x = src.row(b, c);
            const double* g = dy.row(b, c);
            for (std::size_t t = 0; t < src.length; ++t) {
              sum_dy += g[t];
              sum_dy_xhat += g[t] * (x[t] - mean) * ivar;
            }
          }
          grad.weights[i][c] += sum_dy_xhat;
          grad.bias[i][c] += sum_dy;
          if (cache.mode == Mode::train) {
            const double k1 = gamma * ivar;
            const double k2 = sum_dy / m;
            const double k3 = sum_dy_xhat / m;
            for (std::size_t b = 0; b < src.batch; ++b) {
              const double* x = src.row(b, c);
              const double* g = dy.row(b, c);
              double* d = dsrc.row(b, c);
              for (std::size_t t = 0; t < src.length; ++t) {
                const double xhat = (x[t] - mean) * ivar;
                d[t] += k1 * (g[t] - k2 - xhat * k3);
              }
            }
          } else {
            const double k1 = gamma * ivar;
            for (std::size_t b = 0; b < src.batch; ++b) {
              const double* g = dy.row(b, c);
              double* d = dsrc.row(b, c);
              for (std::size_t t = 0; t < src.length; ++t) d[t] += k1 * g[t];
            }
          }
        }
        break;
      }
      case LayerKind::relu: {
        const Tensor& out = cache.outputs[i];
        for (std::size_t j = 0; j < out.size(); ++j) {
          if (out.data[j] > 0.0) dsrc.data[j] += dy.data[j];
        }
        break;
      }
      case LayerKind::maxpool1d: {
        const std::vector<std::uint32_t>& idx = cache.argmax[i];
        const std::size_t out_len = dy.length;
        std::size_t cursor = 0;
        for (std::size_t b = 0; b < dy.batch; ++b) {
          for (std::size_t c = 0; c < dy.channels; ++c) {
            const double* g = dy.row(b, c);
            double* d = dsrc.row(b, c);
            for (std::size_t t = 0; t < out_len; ++t) {
              d[idx[cursor++]] += g[t];
            }
          }
        }
        break;
      }
      case LayerKind::avgpool1d: {
        const double inv = 1.0 / static_cast<double>(cfg.pool_size);
        for (std::size_t b = 0; b < dy.batch; ++b) {
          for (std::size_t c = 0; c < dy.channels; ++c) {
            const double* g = dy.row(b, c);
            double* d = dsrc.row(b, c);
            for (std::size_t t = 0; t < dy.length; ++t) {
              const std::size_t start = t * cfg.pool_stride;
              const double share = g[t] * inv;
              for (std::size_t k = 0; k < cfg.pool_size; ++k) {
                d[start + k] += share;
              }
            }
          }
        }
        break;
      }
      case LayerKind::dropout: {
        if (cache.mode == Mode::train && cfg.drop_probability > 0.0) {
          const std::vector<double>& scale = cache.dropout_scale[i];
          for (std::size_t j = 0; j < dy.size(); ++j) {
            dsrc.data[j] += dy.data[j] * scale[j];
          }
        } else {
          for (std::size_t j = 0; j < dy.size(); ++j) {
            dsrc.data[j] += dy.data[j];
          }
        }
        break;
      }
      case LayerKind::dense: {
        const std::size_t features = cfg.in_features;
        double* gw = grad.weights[i].data();
        double* gb = grad.bias[i].data();
        for (std::size_t b = 0; b < src.batch; ++b) {
          const double* x = src.row(b, 0);
          double* d = dsrc.row(b, 0);
          for (std::size_t o = 0; o < cfg.out_features; ++o) {
            const double g = dy.at(b, o, 0);
            if (g == 0.0) continue;
            const double* w = layer.weights.data() + o * features;
            double* gw_row = gw + o * features;
            for (std::size_t f = 0; f < features; ++f) {
              gw_row[f] += g * x[f];
              d[f] += g * w[f];
            }
            gb[o] += g;
          }
        }
        break;
      }
      case LayerKind::add_residual: {
        for (std::size_t j = 0; j < dy.size(); ++j) {
          dsrc.data[j] += dy.data[j];
        }
        Tensor& dskip = sink(cfg.skip, src);
        for (std::size_t j = 0; j < dy.size(); ++j) {
          dskip.data[j] += dy.data[j];
        }
        break;
      }
      case LayerKind::concat_pool: {
        const std::vector<std::uint32_t>& idx = cache.argmax[i];
        const double inv = 1.0 / static_cast<double>(src.length);
        std::size_t cursor = 0;
        for (std::size_t b = 0; b < src.batch; ++b) {
          for (std::size_t c = 0; c < src.channels; ++c) {
            double* d = dsrc.row(b, c);
            const double g_avg = dy.at(b, c, 0) * inv;
            for (std::size_t t = 0; t < src.length; ++t) d[t] += g_avg;
            d[idx[cursor++]] += dy.at(b, src.channels + c, 0);
          }
        }
        break;
      }
      case LayerKind::flatten: {
        for (std::size_t j = 0; j < dy.size(); ++j) {
          dsrc.data[j] += dy.data[j];
        }
        break;
      }
    }
  }

  if (node_grads != nullptr) *node_grads = std::move(flows);
  return grad;
}

void initialize_parameters(Model& model, Rng& rng) {
  for (Layer& layer : model.layers) {
    switch (layer.cfg.kind) {
      case LayerKind::conv1d: {
        const double fan_in = static_cast<double>(layer.cfg.in_channels *
                                                  layer.cfg.kernel);
        const double limit = 1.0 / std::sqrt(fan_in);
        for (double& w : layer.weights) w = rng.uniform(-limit, limit);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        break;
      }
      case LayerKind::dense: {
        const double fan_in = static_cast<double>(layer.cfg.in_features);
        const double limit = 1.0 / std::sqrt(fan_in);
        for (double& w : layer.weights) w = rng.uniform(-limit, limit);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        break;
      }
      case LayerKind::batchnorm1d:
        std::fill(layer.weights.begin(), layer.weights.end(), 1.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        std::fill(layer.running_mean.begin(), layer.running_mean.end(), 0.0);
        std::fill(layer.running_var.begin(), layer.running_var.end(), 1.0);
        break;
      default:
        break;
    }
  }
}

Model build_cnn1d(std::size_t num_classes, std::size_t input_length,
                  std::size_t in_leads, std::size_t blocks) {
  static constexpr std::size_t kKernels[12] = {20, 5, 5, 5, 5, 5,
                                               3,  3, 3, 3, 3, 3};
  static constexpr std::size_t kChannels[12] = {256, 256, 128, 128, 128, 64,
                                                64,  64,  32,  32,  32,  32};
  if (num_classes < 2) throw ConfigError("a classifier needs >= 2 classes");
  if (in_leads < 1) throw ConfigError("in_leads must be positive");
  if (blocks < 1 || blocks > 12) {
    throw ConfigError("block count must be in [1, 12]");
  }
  if (input_length < 1) throw ConfigError("input_length must be positive");

  Model model;
  model.architecture = "cnn1d";
  model.in_channels = in_leads;
  model.num_classes = num_classes;
  model.input_length_hint = input_length;

  auto add = [&model](LayerConfig cfg) {
    model.layers.push_back(make_layer(cfg));
    return static_cast<int>(model.layers.size()) - 1;
  };

  int prev = -1;
  std::size_t channels = in_leads;
  std::size_t length = input_length;
  for (std::size_t i = 0; i < blocks; ++i) {
    LayerConfig conv;
    conv.kind = LayerKind::conv1d;
    conv.in_channels = channels;
    conv.out_channels = kChannels[i];
    conv.kernel = kKernels[i];
    conv.stride = 1;
    conv.padding = Padding::valid;
    conv.input = prev;
    try {
      length = conv_output_length(length, conv.kernel, 1, Padding::valid);
    } catch (const ShapeError& e) {
      throw ShapeError("block " + std::to_string(i + 1) + ": " + e.what());
    }
    prev = add(conv);

    LayerConfig bn;
    bn.kind = LayerKind::batchnorm1d;
    bn.in_channels = bn.out_channels = kChannels[i];
    bn.input = prev;
    prev = add(bn);

    LayerConfig act;
    act.kind = LayerKind::relu;
    act.input = prev;
    prev = add(act);

    LayerConfig pool;
    pool.kind = LayerKind::maxpool1d;
    pool.pool_size = 2;
    pool.pool_stride = 2;
    pool.input = prev;
    try {
      length = pool_output_length(length, 2, 2);
    } catch (const ShapeError& e) {
      throw ShapeError("block " + std::to_string(i + 1) + ": " + e.what());
    }
    prev = add(pool);

    LayerConfig drop;
    drop.kind = LayerKind::dropout;
    drop.drop_probability = 0.3;
    drop.input = prev;
    prev = add(drop);

    channels = kChannels[i];
  }

  LayerConfig tail_pool;
  tail_pool.kind = LayerKind::avgpool1d;
  tail_pool.pool_size = 1;
  tail_pool.pool_stride = 2;
  tail_pool.input = prev;
  length = pool_output_length(length, 1, 2);
  prev = add(tail_pool);

  LayerConfig flat;
  flat.kind = LayerKind::flatten;
  flat.input = prev;
  prev = add(flat);

  LayerConfig head;
  head.kind = LayerKind::dense;
  head.in_features = channels * length;
  head.out_features = num_classes;
  head.input = prev;
  add(head);

  model.min_input_length = min_admissible_length(model);
  return model;
}

Model build_resnet1d(std::size_t num_classes, std::size_t in_leads,
                     std::size_t blocks) {
  static constexpr std::size_t kWidths[4] = {64, 128, 192, 256};
  if (num_classes < 2) throw ConfigError("a classifier needs >= 2 classes");
  if (in_leads < 1) throw ConfigError("in_leads must be positive");
  if (blocks < 1 || blocks > 4) {
    throw ConfigError("block count must be in [1, 4]");
  }

  Model model;
  model.architecture = "resnet1d";
  model.in_channels = in_leads;
  model.num_classes = num_classes;
  model.input_length_hint = 0;  // the pooled head accepts any length

  auto add = [&model](LayerConfig cfg) {
    model.layers.push_back(make_layer(cfg));
    return static_cast<int>(model.layers.size()) - 1;
  };

  LayerConfig stem;
  stem.kind = LayerKind::conv1d;
  stem.in_channels = in_leads;
  stem.out_channels = 64;
  stem.kernel = 15;
  stem.stride = 1;
  stem.padding = Padding::same;
  stem.input = -1;
  int prev = add(stem);

  LayerConfig stem_bn;
  stem_bn.kind = LayerKind::batchnorm1d;
  stem_bn.in_channels = stem_bn.out_channels = 64;
  stem_bn.input = prev;
  prev = add(stem_bn);

  LayerConfig stem_act;
  stem_act.kind = LayerKind::relu;
  stem_act.input = prev;
  prev = add(stem_act);

  LayerConfig stem_pool;
  stem_pool.kind = LayerKind::maxpool1d;
  stem_pool.pool_size = 2;
  stem_pool.pool_stride = 2;
  stem_pool.input = prev;
  prev = add(stem_pool);

  std::size_t channels = 64;
  for (std::size_t i = 0; i < blocks; ++i) {
    const std::size_t width = kWidths[i];
    const std::size_t stride = i == 0 ? 1 : 2;
    const int entry = prev;

    LayerConfig conv1;
    conv1.kind = LayerKind::conv1d;
    conv1.in_channels = channels;
    conv1.out_channels = width;
    conv1.kernel = 7;
    conv1.stride = stride;
    conv1.padding = Padding::same;
    conv1.input = entry;
    prev = add(conv1);

    LayerConfig bn1;
    bn1.kind = LayerKind::batchnorm1d;
    bn1.in_channels = bn1.out_channels = width;
    bn1.input = prev;
    prev = add(bn1);

    LayerConfig act1;
    act1.kind = LayerKind::relu;
    act1.input = prev;
    prev = add(act1);

    LayerConfig drop;
    drop.kind = LayerKind::dropout;
    drop.drop_probability = 0.3;
    drop.input = prev;
    prev = add(drop);

    LayerConfig conv2;
    conv2.kind = LayerKind::conv1d;
    conv2.in_channels = width;
    conv2.out_channels = width;
    conv2.kernel = 7;
    conv2.stride = 1;
    conv2.padding = Padding::same;
    conv2.input = prev;
    prev = add(conv2);

    LayerConfig bn2;
    bn2.kind = LayerKind::batchnorm1d;
    bn2.in_channels = bn2.out_channels = width;
    bn2.input = prev;
    const int main_end = add(bn2);

    int skip = entry;
    if (stride != 1 || channels != width) {
      LayerConfig proj;
      proj.kind = LayerKind::conv1d;
      proj.in_channels = channels;
      proj.out_channels = width;
      proj.kernel = 1;
      proj.stride = stride;
      proj.padding = Padding::same;
      proj.is_projection = true;
      proj.input = entry;
      skip = add(proj);
    }

    LayerConfig join;
    join.kind = LayerKind::add_residual;
    join.input = main_end;
    join.skip = skip;
    prev = add(join);

    LayerConfig act2;
    act2.kind = LayerKind::relu;
    act2.input = prev;
    prev = add(act2);

    channels = width;
  }

  LayerConfig head_pool;
  head_pool.kind = LayerKind::concat_pool;
  head_pool.input = prev;
  prev = add(head_pool);

  LayerConfig head;
  head.kind = LayerKind::dense;
  head.in_features = 2 * channels;
  head.out_features = num_classes;
  head.input = prev;
  add(head);

  model.min_input_length = min_admissible_length(model);
  return model;
}

double bce_with_logits(const Tensor& logits, const Tensor& targets,
                       Tensor* grad) {
  if (!logits.same_shape(targets)) {
    throw ShapeError("logit and target shapes differ");
  }
  if (logits.size() == 0) throw ShapeError("empty logits");
  if (grad != nullptr) {
    *grad = Tensor::zeros(logits.batch, logits.channels, logits.length);
  }
  const double inv = 1.0 / static_cast<double>(logits.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.data[i];
    const double t = targets.data[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    if (grad != nullptr) {
      const double sigma = 1.0 / (1.0 + std::exp(-z));
      grad->data[i] = (sigma - t) * inv;
    }
  }
  return loss * inv;
}

}  // namespace ecgbench::neural
