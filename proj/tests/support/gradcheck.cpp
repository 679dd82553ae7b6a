#include "gradcheck.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ecgbench/util/rng.hpp"

namespace testsupport {

using ecgbench::Rng;
using ecgbench::neural::ForwardCache;
using ecgbench::neural::Gradients;
using ecgbench::neural::Layer;
using ecgbench::neural::LayerConfig;
using ecgbench::neural::LayerKind;
using ecgbench::neural::Mode;
using ecgbench::neural::Model;
using ecgbench::neural::Padding;
using ecgbench::neural::Tensor;

namespace {

double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Allocates the parameter storage a node of this kind expects.
Layer alloc_node(const LayerConfig& cfg) {
  Layer layer;
  layer.cfg = cfg;
  switch (cfg.kind) {
    case LayerKind::conv1d:
      layer.weights.assign(cfg.out_channels * cfg.in_channels * cfg.kernel, 0.0);
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

LayerConfig conv_cfg(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                     std::size_t stride, Padding padding, int input,
                     bool projection = false) {
  LayerConfig cfg;
  cfg.kind = LayerKind::conv1d;
  cfg.in_channels = in_ch;
  cfg.out_channels = out_ch;
  cfg.kernel = kernel;
  cfg.stride = stride;
  cfg.padding = padding;
  cfg.is_projection = projection;
  cfg.input = input;
  return cfg;
}

LayerConfig simple_cfg(LayerKind kind, int input) {
  LayerConfig cfg;
  cfg.kind = kind;
  cfg.input = input;
  return cfg;
}

LayerConfig bn_cfg(std::size_t channels, int input) {
  LayerConfig cfg;
  cfg.kind = LayerKind::batchnorm1d;
  cfg.out_channels = channels;
  cfg.input = input;
  return cfg;
}

LayerConfig pool_cfg(LayerKind kind, std::size_t window, std::size_t stride,
                     int input) {
  LayerConfig cfg;
  cfg.kind = kind;
  cfg.pool_size = window;
  cfg.pool_stride = stride;
  cfg.input = input;
  return cfg;
}

LayerConfig dropout_cfg(double p, int input) {
  LayerConfig cfg;
  cfg.kind = LayerKind::dropout;
  cfg.drop_probability = p;
  cfg.input = input;
  return cfg;
}

LayerConfig dense_cfg(std::size_t in_features, std::size_t out_features, int input) {
  LayerConfig cfg;
  cfg.kind = LayerKind::dense;
  cfg.in_features = in_features;
  cfg.out_features = out_features;
  cfg.input = input;
  return cfg;
}

LayerConfig residual_cfg(int input, int skip) {
  LayerConfig cfg;
  cfg.kind = LayerKind::add_residual;
  cfg.input = input;
  cfg.skip = skip;
  return cfg;
}

Model assemble(std::string name, std::size_t in_channels, std::size_t num_classes,
               std::vector<LayerConfig> configs, std::uint64_t init_seed) {
  Model model;
  model.architecture = std::move(name);
  model.in_channels = in_channels;
  model.num_classes = num_classes;
  for (const auto& cfg : configs) model.layers.push_back(alloc_node(cfg));
  Rng rng(init_seed);
  ecgbench::neural::initialize_parameters(model, rng);
  // Zero biases and identity batchnorm make too many gradients trivially
  // zero; nudge every parameter off the stationary defaults.
  for (Layer& layer : model.layers) {
    if (!layer.has_parameters()) continue;
    for (double& b : layer.bias) b += rng.uniform(-0.3, 0.3);
    if (layer.cfg.kind == LayerKind::batchnorm1d) {
      for (double& g : layer.weights) g += rng.uniform(-0.3, 0.3);
    }
  }
  return model;
}

void randomize_running_stats(Model& model, std::uint64_t seed) {
  Rng rng(seed);
  for (Layer& layer : model.layers) {
    if (layer.cfg.kind != LayerKind::batchnorm1d) continue;
    for (double& m : layer.running_mean) m = rng.uniform(-0.5, 0.5);
    for (double& v : layer.running_var) v = rng.uniform(0.5, 1.5);
  }
}

void merge(GradBatteryResult& total, const GradCheckResult& one,
           const std::string& model_name) {
  ++total.models_checked;
  total.checks += one.checks;
  if (one.max_rel_error > total.max_rel_error) {
    total.max_rel_error = one.max_rel_error;
    total.worst = model_name + ": " + one.worst;
  }
}

}  // namespace

std::vector<double*> parameter_pointers(Model& model) {
  std::vector<double*> out;
  for (Layer& layer : model.layers) {
    for (double& w : layer.weights) out.push_back(&w);
    for (double& b : layer.bias) out.push_back(&b);
  }
  return out;
}

double loss_value(Model& model, const Tensor& input, const Tensor& targets,
                  Mode mode, std::uint64_t dropout_seed) {
  Rng dropout_rng(dropout_seed);
  const Tensor logits = forward_pass(model, input, mode, &dropout_rng);
  return ecgbench::neural::bce_with_logits(logits, targets);
}

std::vector<double> analytic_gradient(Model& model, const Tensor& input,
                                      const Tensor& targets, Mode mode,
                                      std::uint64_t dropout_seed,
                                      Tensor* input_grad) {
  Rng dropout_rng(dropout_seed);
  ForwardCache cache;
  const Tensor logits = forward_pass(model, input, mode, &dropout_rng, &cache);
  Tensor loss_grad;
  ecgbench::neural::bce_with_logits(logits, targets, &loss_grad);
  const Gradients grads = backward_pass(model, cache, input, loss_grad);
  std::vector<double> flat;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    flat.insert(flat.end(), grads.weights[i].begin(), grads.weights[i].end());
    flat.insert(flat.end(), grads.bias[i].begin(), grads.bias[i].end());
  }
  if (input_grad != nullptr) *input_grad = grads.input;
  return flat;
}

GradCheckResult check_gradients_exhaustive(Model& model, const Tensor& input,
                                           const Tensor& targets, Mode mode,
                                           double epsilon,
                                           std::uint64_t dropout_seed) {
  Tensor input_grad;
  const std::vector<double> analytic =
      analytic_gradient(model, input, targets, mode, dropout_seed, &input_grad);
  const std::vector<double*> params = parameter_pointers(model);
  if (params.size() != analytic.size()) {
    throw std::logic_error("gradient vector does not mirror the parameters");
  }

  GradCheckResult result;
  auto record = [&](double got, double want, const std::string& where) {
    ++result.checks;
    const double err = rel_error(got, want);
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      std::ostringstream oss;
      oss << where << " analytic=" << got << " numeric=" << want;
      result.worst = oss.str();
    }
  };

  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + epsilon;
    const double up = loss_value(model, input, targets, mode, dropout_seed);
    *params[i] = saved - epsilon;
    const double down = loss_value(model, input, targets, mode, dropout_seed);
    *params[i] = saved;
    record(analytic[i], (up - down) / (2.0 * epsilon),
           "param " + std::to_string(i));
  }

  Tensor probe = input;
  for (std::size_t i = 0; i < probe.data.size(); ++i) {
    const double saved = probe.data[i];
    probe.data[i] = saved + epsilon;
    const double up = loss_value(model, probe, targets, mode, dropout_seed);
    probe.data[i] = saved - epsilon;
    const double down = loss_value(model, probe, targets, mode, dropout_seed);
    probe.data[i] = saved;
    record(input_grad.data[i], (up - down) / (2.0 * epsilon),
           "input " + std::to_string(i));
  }
  return result;
}

GradCheckResult check_gradients_directional(Model& model, const Tensor& input,
                                            const Tensor& targets, Mode mode,
                                            std::size_t directions, double epsilon,
                                            std::uint64_t seed,
                                            std::uint64_t dropout_seed) {
  const std::vector<double> analytic =
      analytic_gradient(model, input, targets, mode, dropout_seed);
  std::vector<double*> params = parameter_pointers(model);
  if (params.size() != analytic.size()) {
    throw std::logic_error("gradient vector does not mirror the parameters");
  }

  GradCheckResult result;
  Rng rng(seed);
  for (std::size_t d = 0; d < directions; ++d) {
    std::vector<double> v(params.size());
    double norm = 0.0;
    for (double& c : v) {
      c = rng.normal();
      norm += c * c;
    }
    norm = std::sqrt(norm);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] /= norm;
      dot += analytic[i] * v[i];
    }

    for (std::size_t i = 0; i < params.size(); ++i) *params[i] += epsilon * v[i];
    const double up = loss_value(model, input, targets, mode, dropout_seed);
    for (std::size_t i = 0; i < params.size(); ++i) {
      *params[i] -= 2.0 * epsilon * v[i];
    }
    const double down = loss_value(model, input, targets, mode, dropout_seed);
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] += epsilon * v[i];

    ++result.checks;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = rel_error(dot, numeric);
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      std::ostringstream oss;
      oss << "direction " << d << " analytic=" << dot << " numeric=" << numeric;
      result.worst = oss.str();
    }
  }
  return result;
}

Tensor random_batch(std::size_t batch, std::size_t channels, std::size_t length,
                    std::uint64_t seed, double scale) {
  Rng rng(seed);
  Tensor t = Tensor::zeros(batch, channels, length);
  for (double& v : t.data) v = rng.normal(0.0, scale);
  return t;
}

Tensor random_targets(std::size_t batch, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t = Tensor::zeros(batch, classes, 1);
  for (double& v : t.data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return t;
}

GradBatteryResult run_gradcheck_battery(std::uint64_t seed, double epsilon) {
  GradBatteryResult total;

  struct Case {
    std::string name;
    Model model;
    std::size_t channels;
    std::size_t length;
    Mode mode;
  };
  std::vector<Case> cases;

  cases.push_back({"conv_valid",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 3, 1, Padding::valid, -1),
                             simple_cfg(LayerKind::flatten, 0),
                             dense_cfg(24, 3, 1)},
                            seed + 1),
                   2, 10, Mode::eval});
  cases.push_back({"conv_same_stride2",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 5, 2, Padding::same, -1),
                             simple_cfg(LayerKind::relu, 0),
                             simple_cfg(LayerKind::flatten, 1),
                             dense_cfg(15, 3, 2)},
                            seed + 2),
                   2, 10, Mode::eval});
  cases.push_back({"projection_residual",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 4, 3, 1, Padding::same, -1),
                             conv_cfg(2, 4, 1, 1, Padding::valid, -1, true),
                             residual_cfg(0, 1),
                             simple_cfg(LayerKind::relu, 2),
                             simple_cfg(LayerKind::flatten, 3),
                             dense_cfg(40, 3, 4)},
                            seed + 3),
                   2, 10, Mode::eval});
  cases.push_back({"identity_residual",
                   assemble("mini", 2, 3,
                            {simple_cfg(LayerKind::relu, -1),
                             conv_cfg(2, 2, 3, 1, Padding::same, 0),
                             residual_cfg(1, 0),
                             simple_cfg(LayerKind::flatten, 2),
                             dense_cfg(20, 3, 3)},
                            seed + 4),
                   2, 10, Mode::eval});
  cases.push_back({"batchnorm_train",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 3, 1, Padding::valid, -1),
                             bn_cfg(3, 0), simple_cfg(LayerKind::flatten, 1),
                             dense_cfg(24, 3, 2)},
                            seed + 5),
                   2, 10, Mode::train});
  {
    Model m = assemble("mini", 2, 3,
                       {conv_cfg(2, 3, 3, 1, Padding::valid, -1), bn_cfg(3, 0),
                        simple_cfg(LayerKind::flatten, 1), dense_cfg(24, 3, 2)},
                       seed + 6);
    randomize_running_stats(m, seed + 60);
    cases.push_back({"batchnorm_eval", std::move(m), 2, 10, Mode::eval});
  }
  cases.push_back({"maxpool",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 3, 1, Padding::valid, -1),
                             pool_cfg(LayerKind::maxpool1d, 2, 2, 0),
                             simple_cfg(LayerKind::flatten, 1),
                             dense_cfg(12, 3, 2)},
                            seed + 7),
                   2, 10, Mode::eval});
  cases.push_back({"avgpool",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 3, 1, Padding::valid, -1),
                             pool_cfg(LayerKind::avgpool1d, 3, 2, 0),
                             simple_cfg(LayerKind::flatten, 1),
                             dense_cfg(9, 3, 2)},
                            seed + 8),
                   2, 10, Mode::eval});
  cases.push_back({"dropout_train",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 3, 3, 1, Padding::valid, -1),
                             simple_cfg(LayerKind::relu, 0), dropout_cfg(0.4, 1),
                             simple_cfg(LayerKind::flatten, 2),
                             dense_cfg(24, 3, 3)},
                            seed + 9),
                   2, 10, Mode::train});
  cases.push_back({"concat_pool",
                   assemble("mini", 2, 3,
                            {conv_cfg(2, 4, 3, 1, Padding::same, -1),
                             simple_cfg(LayerKind::concat_pool, 0),
                             dense_cfg(8, 3, 1)},
                            seed + 10),
                   2, 10, Mode::eval});

  std::uint64_t salt = 0;
  for (auto& c : cases) {
    const Tensor input = random_batch(2, c.channels, c.length, seed + 100 + salt);
    const Tensor targets = random_targets(2, 3, seed + 200 + salt);
    const auto one = check_gradients_exhaustive(c.model, input, targets, c.mode,
                                                epsilon, seed + 300 + salt);
    merge(total, one, c.name);
    ++salt;
  }

  // Two-block versions of both full architectures, checked along random
  // directions in both modes (per-coordinate differencing is impractical at
  // several hundred thousand parameters).
  struct ArchCase {
    std::string name;
    Model model;
    Mode mode;
  };
  std::vector<ArchCase> archs;
  {
    Model cnn = ecgbench::neural::build_cnn1d(3, 64, 1, 2);
    Rng rng(seed + 11);
    ecgbench::neural::initialize_parameters(cnn, rng);
    Model cnn_eval = cnn;
    randomize_running_stats(cnn_eval, seed + 61);
    archs.push_back({"cnn1d_2block_train", std::move(cnn), Mode::train});
    archs.push_back({"cnn1d_2block_eval", std::move(cnn_eval), Mode::eval});
  }
  {
    Model res = ecgbench::neural::build_resnet1d(3, 1, 2);
    Rng rng(seed + 12);
    ecgbench::neural::initialize_parameters(res, rng);
    Model res_eval = res;
    randomize_running_stats(res_eval, seed + 62);
    archs.push_back({"resnet1d_2block_train", std::move(res), Mode::train});
    archs.push_back({"resnet1d_2block_eval", std::move(res_eval), Mode::eval});
  }
  for (auto& a : archs) {
    const Tensor input = random_batch(2, 1, 64, seed + 400 + salt);
    const Tensor targets = random_targets(2, 3, seed + 500 + salt);
    const auto one = check_gradients_directional(a.model, input, targets, a.mode,
                                                 20, epsilon, seed + 600 + salt,
                                                 seed + 700 + salt);
    merge(total, one, a.name);
    ++salt;
  }
  return total;
}

}  // namespace testsupport
