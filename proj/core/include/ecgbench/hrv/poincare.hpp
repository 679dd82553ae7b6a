#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ecgbench::hrv {

// 224x224 grayscale raster of a Poincare scatter, intensities in [0, 1].
struct PoincareImage {
  static constexpr std::size_t kSize = 224;

  std::vector<double> pixels;  // row-major, kSize * kSize
  std::pair<double, double> axis_range_s{0.2, 2.0};

  double at(std::size_t row, std::size_t col) const {
    return pixels[row * kSize + col];
  }
};

// Lag-1 return map: point i = (nn[i], nn[i+1]). Fewer than 2 intervals
// raise InsufficientDataError.
std::vector<std::pair<double, double>> poincare_points(
    const std::vector<double>& nn_intervals_s);

// Stamps each point as a 3x3 block adding 0.5 per stamp, saturating at 1.
// Row 0 corresponds to the maximum y value; out-of-range points clamp to the
// border. An empty point list yields an all-zero image.
PoincareImage rasterize_poincare(
    const std::vector<std::pair<double, double>>& points,
    std::pair<double, double> axis_range_s = {0.2, 2.0});

}  // namespace ecgbench::hrv
