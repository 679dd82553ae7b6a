#include "ecgbench/hrv/poincare.hpp"

#include <algorithm>
#include <cmath>

#include "ecgbench/errors.hpp"

namespace ecgbench::hrv {

std::vector<std::pair<double, double>> poincare_points(
    const std::vector<double>& nn_intervals_s) {
  if (nn_intervals_s.size() < 2) {
    throw InsufficientDataError("need at least 2 NN intervals");
  }
  std::vector<std::pair<double, double>> points;
  points.reserve(nn_intervals_s.size() - 1);
  for (std::size_t i = 0; i + 1 < nn_intervals_s.size(); ++i) {
    points.emplace_back(nn_intervals_s[i], nn_intervals_s[i + 1]);
  }
  return points;
}

PoincareImage rasterize_poincare(
    const std::vector<std::pair<double, double>>& points,
    std::pair<double, double> axis_range_s) {
  const auto [lo, hi] = axis_range_s;
  if (!(lo < hi)) throw RangeError("axis range must satisfy min < max");

  PoincareImage image;
  image.axis_range_s = axis_range_s;
  image.pixels.assign(PoincareImage::kSize * PoincareImage::kSize, 0.0);

  const auto last = static_cast<double>(PoincareImage::kSize - 1);
  const auto to_pixel = [&](double value) {
    const double scaled = (value - lo) / (hi - lo) * last;
    return static_cast<long>(
        std::clamp(std::llround(scaled), 0LL, static_cast<long long>(last)));
  };

  for (const auto& [x, y] : points) {
    const long col = to_pixel(x);
    const long row = static_cast<long>(last) - to_pixel(y);  // y up -> row 0
    for (long dr = -1; dr <= 1; ++dr) {
      for (long dc = -1; dc <= 1; ++dc) {
        const long r = row + dr;
        const long c = col + dc;
        if (r < 0 || c < 0 || r > static_cast<long>(last) ||
            c > static_cast<long>(last)) {
          continue;
        }
        double& pixel =
            image.pixels[static_cast<std::size_t>(r) * PoincareImage::kSize +
                         static_cast<std::size_t>(c)];
        pixel = std::min(1.0, pixel + 0.5);
      }
    }
  }
  return image;
}

}  // namespace ecgbench::hrv
