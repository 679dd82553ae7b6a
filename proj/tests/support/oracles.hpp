#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/tsfeat/spec.hpp"

namespace testsupport {

// O(n^2) discrete Fourier transform, first n/2 + 1 coefficients. Written
// from the transform definition so it shares nothing with the library FFT.
std::vector<std::complex<double>> naive_rdft(const std::vector<double>& x);

// Brute-force reference value for one configured feature, built on direct
// formula sums, explicit scans, and the naive DFT. std::nullopt encodes
// "undefined for this series" and must match the library's missing flag.
std::optional<double> oracle_feature(const ecgbench::tsfeat::FeatureSpec& spec,
                                     const std::vector<double>& series);

struct OracleBatteryResult {
  std::size_t comparisons = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

// Evaluates the default feature grid against the oracles on `num_series`
// random series with lengths in [min_len, max_len]. Values must agree to
// `tol` relative error (with an absolute floor of the same magnitude) and
// missing flags must agree exactly.
OracleBatteryResult run_feature_oracle_battery(std::size_t num_series,
                                               std::size_t min_len,
                                               std::size_t max_len,
                                               std::uint64_t seed,
                                               double tol = 1e-9);

}  // namespace testsupport
