#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecgbench/neural/model.hpp"
#include "ecgbench/neural/tensor.hpp"

namespace ecgbench::neural {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 7;
  // When positive, training stops after the first epoch whose post-update
  // exact-match accuracy on the training set reaches this value.
  double stop_train_accuracy = 0.0;
  double threshold = 0.5;  // per-class decision cut for exact match
};

struct TrainLog {
  std::vector<double> epoch_loss;      // mean batch loss per epoch
  std::vector<double> epoch_accuracy;  // only filled when early stop is on
  std::size_t epochs_run = 0;
};

// Minibatch SGD with classical momentum on the sigmoid cross-entropy loss.
// `examples` is (num_examples, channels, length); `targets` is
// (num_examples, num_classes, 1) with 0/1 entries.  Batch order is
// reshuffled every epoch from the "shuffle" stream of config.seed and
// dropout draws from the "dropout" stream, so runs are reproducible.
TrainLog train_model(Model& model, const Tensor& examples,
                     const Tensor& targets, const TrainConfig& config);

// Fraction of examples whose thresholded sigmoid outputs equal the target
// set exactly (computed in inference mode).
double exact_match_accuracy(Model& model, const Tensor& examples,
                            const Tensor& targets, double threshold = 0.5);

// Inference-mode logits for a batch of examples.
Tensor predict_logits(Model& model, const Tensor& examples);

}  // namespace ecgbench::neural
