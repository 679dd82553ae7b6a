#pragma once

#include <cstddef>
#include <vector>

#include "ecgbench/neural/model.hpp"
#include "ecgbench/neural/tensor.hpp"

namespace ecgbench::neural {

// Class-activation map for one example (shape (1, channels, length)).
// The map is built at the last main-path convolution: each channel of its
// activation is weighted by the time-averaged gradient of the chosen class
// logit with respect to that channel, the weighted sum is rectified,
// linearly resampled to the input length, and scaled so its maximum is 1
// (an all-zero map stays zero).  Throws IndexError when `class_index` is
// out of range and ShapeError when the batch is not a single example or the
// model has no convolution layer.
std::vector<double> gradcam1d(Model& model, const Tensor& example,
                              std::size_t class_index);

}  // namespace ecgbench::neural
