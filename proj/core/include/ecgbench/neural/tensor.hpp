#pragma once

#include <cstddef>
#include <vector>

namespace ecgbench::neural {

// Dense (batch, channels, length) array, contiguous with length fastest.
// Vectors and matrices are represented with length = 1.
struct Tensor {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> data;

  static Tensor zeros(std::size_t batch, std::size_t channels,
                      std::size_t length) {
    Tensor t;
    t.batch = batch;
    t.channels = channels;
    t.length = length;
    t.data.assign(batch * channels * length, 0.0);
    return t;
  }

  std::size_t size() const { return data.size(); }

  double* row(std::size_t b, std::size_t c) {
    return data.data() + (b * channels + c) * length;
  }
  const double* row(std::size_t b, std::size_t c) const {
    return data.data() + (b * channels + c) * length;
  }

  double& at(std::size_t b, std::size_t c, std::size_t t) {
    return data[(b * channels + c) * length + t];
  }
  double at(std::size_t b, std::size_t c, std::size_t t) const {
    return data[(b * channels + c) * length + t];
  }

  bool same_shape(const Tensor& other) const {
    return batch == other.batch && channels == other.channels &&
           length == other.length;
  }
};

}  // namespace ecgbench::neural
