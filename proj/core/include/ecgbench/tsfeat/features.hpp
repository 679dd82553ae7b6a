#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/signal.hpp"
#include "ecgbench/tsfeat/spec.hpp"

namespace ecgbench::tsfeat {

// Memoizes the quantities shared across feature groups (mean, population
// variance, sorted copy, spectrum) so a grid of specs evaluates in one pass
// over the series. Construction validates length >= 2 and finiteness.
class SeriesContext {
 public:
  explicit SeriesContext(std::vector<double> series);

  const std::vector<double>& values() const { return series_; }
  std::size_t size() const { return series_.size(); }
  double mean() const;
  double variance() const;  // population convention
  const std::vector<double>& sorted() const;
  const std::vector<std::complex<double>>& spectrum() const;  // rfft

  // Type-7 (linear interpolation) quantile of the sorted values.
  double quantile(double q) const;

 private:
  std::vector<double> series_;
  mutable std::optional<double> mean_;
  mutable std::optional<double> variance_;
  mutable std::vector<double> sorted_;
  mutable std::vector<std::complex<double>> spectrum_;
};

// One feature value; nullopt marks "missing" (undefined for this series,
// e.g. autocorrelation of a constant input).
std::optional<double> compute_feature(const FeatureSpec& spec,
                                      const SeriesContext& context);
std::optional<double> compute_feature(const FeatureSpec& spec,
                                      const std::vector<double>& series);

// Named values for one record: one entry per (lead, spec), lead prefix
// "lead{i}__".
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<std::optional<double>> values;
};

FeatureVector extract_all(const std::vector<Signal>& leads,
                          const std::vector<FeatureSpec>& specs);

}  // namespace ecgbench::tsfeat
