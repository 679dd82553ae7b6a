#include "ecgbench/util/fft.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ecgbench {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative Cooley-Tukey, n a power of two. sign = -1 forward, +1 inverse.
void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// exp(sign * i * pi * k^2 / n) with k^2 reduced mod 2n to keep the trig
// argument small; the chirp is periodic in k^2 with period 2n.
std::complex<double> chirp(std::uint64_t k, std::size_t n, int sign) {
  const std::uint64_t m = 2 * static_cast<std::uint64_t>(n);
  const std::uint64_t k2 = (k % m) * (k % m) % m;
  const double angle =
      sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

// Bluestein: a length-n DFT expressed as a circular convolution that is
// evaluated with power-of-two FFTs.
void fft_bluestein(std::vector<std::complex<double>>& data, int sign) {
  const std::size_t n = data.size();
  const std::size_t m = next_pow2(2 * n - 1);

  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  std::vector<std::complex<double>> b(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const std::complex<double> w = chirp(k, n, sign);
    a[k] = data[k] * w;
    b[k] = std::conj(w);
    if (k != 0) b[m - k] = std::conj(w);
  }
  fft_pow2(a, -1);
  fft_pow2(b, -1);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, +1);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    data[k] = a[k] * inv_m * chirp(k, n, sign);
  }
}

void transform(std::vector<std::complex<double>>& data, int sign) {
  if (data.size() <= 1) return;
  if (is_pow2(data.size())) {
    fft_pow2(data, sign);
  } else {
    fft_bluestein(data, sign);
  }
}

}  // namespace

void fft(std::vector<std::complex<double>>& data) { transform(data, -1); }

void ifft(std::vector<std::complex<double>>& data) {
  transform(data, +1);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (auto& value : data) value *= inv_n;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& data) {
  std::vector<std::complex<double>> full(data.begin(), data.end());
  fft(full);
  full.resize(data.size() / 2 + 1);
  return full;
}

}  // namespace ecgbench
