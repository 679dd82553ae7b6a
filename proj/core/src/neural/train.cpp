#include "ecgbench/neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/rng.hpp"

namespace ecgbench::neural {

namespace {

Tensor gather_rows(const Tensor& source, const std::vector<std::size_t>& rows,
                   std::size_t begin, std::size_t end) {
  Tensor out = Tensor::zeros(end - begin, source.channels, source.length);
  const std::size_t stride = source.channels * source.length;
  for (std::size_t i = begin; i < end; ++i) {
    std::copy_n(source.data.data() + rows[i] * stride, stride,
                out.data.data() + (i - begin) * stride);
  }
  return out;
}

}  // namespace

TrainLog train_model(Model& model, const Tensor& examples,
                     const Tensor& targets, const TrainConfig& config) {
  if (examples.batch == 0) throw DataError("training set is empty");
  if (targets.batch != examples.batch ||
      targets.channels != model.num_classes || targets.length != 1) {
    throw ShapeError("targets must be (num_examples, num_classes, 1)");
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw ConfigError("epochs and batch_size must be positive");
  }

  Rng shuffle_rng = Rng::substream(config.seed, "shuffle");
  Rng dropout_rng = Rng::substream(config.seed, "dropout");

  const std::size_t n = model.layers.size();
  std::vector<std::vector<double>> velocity_w(n);
  std::vector<std::vector<double>> velocity_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    velocity_w[i].assign(model.layers[i].weights.size(), 0.0);
    velocity_b[i].assign(model.layers[i].bias.size(), 0.0);
  }

  std::vector<std::size_t> order(examples.batch);
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < examples.batch;
         begin += config.batch_size) {
      const std::size_t end =
          std::min(examples.batch, begin + config.batch_size);
      const Tensor batch = gather_rows(examples, order, begin, end);
      const Tensor batch_targets = gather_rows(targets, order, begin, end);

      ForwardCache cache;
      const Tensor logits =
          forward_pass(model, batch, Mode::train, &dropout_rng, &cache);
      Tensor loss_grad;
      loss_sum += bce_with_logits(logits, batch_targets, &loss_grad);
      ++batches;
      const Gradients grads =
          backward_pass(model, cache, batch, loss_grad, nullptr);

      for (std::size_t i = 0; i < n; ++i) {
        Layer& layer = model.layers[i];
        std::vector<double>& vw = velocity_w[i];
        std::vector<double>& vb = velocity_b[i];
        for (std::size_t j = 0; j < layer.weights.size(); ++j) {
          vw[j] = config.momentum * vw[j] -
                  config.learning_rate * grads.weights[i][j];
          layer.weights[j] += vw[j];
        }
        for (std::size_t j = 0; j < layer.bias.size(); ++j) {
          vb[j] = config.momentum * vb[j] -
                  config.learning_rate * grads.bias[i][j];
          layer.bias[j] += vb[j];
        }
      }
    }
    log.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    log.epochs_run = epoch + 1;

    if (config.stop_train_accuracy > 0.0) {
      const double accuracy = exact_match_accuracy(model, examples, targets,
                                                   config.threshold);
      log.epoch_accuracy.push_back(accuracy);
      if (accuracy >= config.stop_train_accuracy) break;
    }
  }
  return log;
}

double exact_match_accuracy(Model& model, const Tensor& examples,
                            const Tensor& targets, double threshold) {
  if (examples.batch == 0) throw DataError("no examples to score");
  const Tensor logits = predict_logits(model, examples);
  // sigma(z) >= threshold <=> z >= logit(threshold)
  const double cut = std::log(threshold / (1.0 - threshold));
  std::size_t hits = 0;
  for (std::size_t b = 0; b < examples.batch; ++b) {
    bool all = true;
    for (std::size_t c = 0; c < logits.channels; ++c) {
      const bool predicted = logits.at(b, c, 0) >= cut;
      const bool expected = targets.at(b, c, 0) > 0.5;
      if (predicted != expected) {
        all = false;
        break;
      }
    }
    hits += all ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.batch);
}

Tensor predict_logits(Model& model, const Tensor& examples) {
  return forward_pass(model, examples, Mode::eval, nullptr, nullptr);
}

}  // namespace ecgbench::neural
