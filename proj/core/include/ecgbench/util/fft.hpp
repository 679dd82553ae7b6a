#pragma once

#include <complex>
#include <vector>

namespace ecgbench {

// In-place forward DFT, X[k] = sum_j x[j] exp(-2*pi*i*j*k/n), no
// normalization. Radix-2 when n is a power of two, Bluestein otherwise.
void fft(std::vector<std::complex<double>>& data);

// In-place inverse DFT including the 1/n factor.
void ifft(std::vector<std::complex<double>>& data);

// DFT of a real series; returns the n/2 + 1 non-redundant coefficients.
std::vector<std::complex<double>> rfft(const std::vector<double>& data);

}  // namespace ecgbench
