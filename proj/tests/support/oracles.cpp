#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

#include "ecgbench/util/rng.hpp"
#include "testutil.hpp"

namespace testsupport {

namespace {

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Population central moment of order p.
double central_moment(const std::vector<double>& x, int p) {
  const double mu = mean_of(x);
  double s = 0.0;
  for (double v : x) s += std::pow(v - mu, p);
  return s / static_cast<double>(x.size());
}

double pop_variance(const std::vector<double>& x) { return central_moment(x, 2); }

// Linear-interpolation quantile on a sorted copy (the "type 7" rule used
// throughout the library): position q * (n - 1), interpolate neighbours.
double sorted_quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + (x[hi] - x[lo]) * frac;
}

// Median as the average of the one or two middle order statistics.
double median_of(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  if (n % 2 == 1) return x[n / 2];
  return 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

// Autocorrelation at a single lag, population-variance normalised.
std::optional<double> acf_at(const std::vector<double>& x, std::size_t lag) {
  const std::size_t n = x.size();
  if (lag >= n) return std::nullopt;
  const double mu = mean_of(x);
  const double var = pop_variance(x);
  if (var < 1e-10) return std::nullopt;
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) {
    s += (x[t] - mu) * (x[t + lag] - mu);
  }
  return s / (static_cast<double>(n - lag) * var);
}

// Discretise into `bins` equal-width cells over [min, max]; constant series
// maps everything to cell 0.
std::vector<int> equal_width_bins(const std::vector<double>& x, int bins) {
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  std::vector<int> out(x.size(), 0);
  if (hi <= lo) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto idx = static_cast<long long>(
        std::floor((x[i] - lo) * static_cast<double>(bins) / (hi - lo)));
    idx = std::clamp<long long>(idx, 0, bins - 1);
    out[i] = static_cast<int>(idx);
  }
  return out;
}

// Ricker (Mexican hat) wavelet sampled the way scipy.signal.ricker does:
// `points` samples centred on zero at scale `a`.
std::vector<double> ricker_wavelet(std::size_t points, double a) {
  const double amp = 2.0 / (std::sqrt(3.0 * a) * std::pow(std::numbers::pi, 0.25));
  std::vector<double> w(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) - (static_cast<double>(points) - 1.0) / 2.0;
    const double sq = (t / a) * (t / a);
    w[i] = amp * (1.0 - sq) * std::exp(-sq / 2.0);
  }
  return w;
}

std::optional<double> oracle_fft_coefficient(const std::vector<double>& x,
                                             std::size_t coeff, const std::string& attr) {
  const auto spec = naive_rdft(x);
  if (coeff >= spec.size()) return std::nullopt;
  const std::complex<double> c = spec[coeff];
  if (attr == "real") return c.real();
  if (attr == "imag") return c.imag();
  if (attr == "abs") return std::abs(c);
  // angle, reported in degrees
  return std::atan2(c.imag(), c.real()) * 180.0 / std::numbers::pi;
}

std::optional<double> oracle_fft_aggregated(const std::vector<double>& x,
                                            const std::string& aggtype) {
  const auto spec = naive_rdft(x);
  std::vector<double> mag(spec.size());
  double total = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    mag[i] = std::abs(spec[i]);
    total += mag[i];
  }
  if (total == 0.0) return std::nullopt;
  double centroid = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    centroid += static_cast<double>(i) * mag[i];
  }
  centroid /= total;
  double variance = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double d = static_cast<double>(i) - centroid;
    variance += d * d * mag[i];
  }
  variance /= total;
  if (aggtype == "centroid") return centroid;
  if (aggtype == "variance") return variance;
  if (variance < 0.5) return std::nullopt;
  double m3 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double d = static_cast<double>(i) - centroid;
    m3 += d * d * d * mag[i];
    m4 += d * d * d * d * mag[i];
  }
  m3 /= total;
  m4 /= total;
  if (aggtype == "skew") return m3 / std::pow(variance, 1.5);
  return m4 / (variance * variance);  // kurtosis, not excess
}

std::optional<double> oracle_benford(const std::vector<double>& x) {
  // Leading decimal digit by scaling the magnitude into [1, 10).
  std::vector<double> freq(9, 0.0);
  std::size_t used = 0;
  for (double v : x) {
    double a = std::fabs(v);
    if (a == 0.0) continue;
    while (a >= 10.0) a /= 10.0;
    while (a < 1.0) a *= 10.0;
    int d = static_cast<int>(a);
    d = std::clamp(d, 1, 9);
    freq[static_cast<std::size_t>(d - 1)] += 1.0;
    ++used;
  }
  if (used == 0) return std::nullopt;
  std::size_t distinct = 0;
  for (double f : freq) {
    if (f > 0.0) ++distinct;
  }
  if (distinct < 2) return std::nullopt;
  for (double& f : freq) f /= static_cast<double>(used);
  std::vector<double> benford(9);
  for (int d = 1; d <= 9; ++d) {
    benford[static_cast<std::size_t>(d - 1)] =
        std::log10(1.0 + 1.0 / static_cast<double>(d));
  }
  const double mo = mean_of(freq);
  const double mb = mean_of(benford);
  double cov = 0.0;
  double var_o = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    cov += (freq[i] - mo) * (benford[i] - mb);
    var_o += (freq[i] - mo) * (freq[i] - mo);
    var_b += (benford[i] - mb) * (benford[i] - mb);
  }
  if (var_o == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_o * var_b);
}

std::optional<double> oracle_spkt_welch(const std::vector<double>& x, std::size_t coeff) {
  // Single-segment Welch estimate: remove the mean, apply a periodic Hann
  // window, and normalise the squared spectrum by the window energy.
  const std::size_t n = x.size();
  const double mu = mean_of(x);
  std::vector<double> w(n);
  std::vector<double> windowed(n);
  double wsum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                static_cast<double>(n));
    windowed[j] = (x[j] - mu) * w[j];
    wsum += w[j] * w[j];
  }
  const auto spec = naive_rdft(windowed);
  if (coeff >= spec.size()) return std::nullopt;
  double density = std::norm(spec[coeff]) / wsum;
  const bool is_last_even = (n % 2 == 0) && (coeff == spec.size() - 1);
  if (coeff != 0 && !is_last_even) density *= 2.0;
  return density;
}

std::optional<double> oracle_cwt(const std::vector<double>& x, std::size_t coeff,
                                 double width) {
  const std::size_t n = x.size();
  if (coeff >= n) return std::nullopt;
  const auto points = static_cast<std::size_t>(
      std::min<long long>(std::llround(10.0 * width), static_cast<long long>(n)));
  const auto wavelet = ricker_wavelet(points, width);
  // "same"-mode convolution: full convolution index k + (points - 1) / 2.
  const std::size_t full_index = coeff + (points - 1) / 2;
  double s = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    if (full_index < j) continue;
    const std::size_t xi = full_index - j;
    if (xi >= n) continue;
    s += x[xi] * wavelet[j];
  }
  return s;
}

std::optional<double> oracle_lempel_ziv(const std::vector<double>& x, int bins) {
  const auto symbols = equal_width_bins(x, bins);
  std::unordered_set<std::string> phrases;
  std::string current;
  for (int s : symbols) {
    current += static_cast<char>('A' + s % 26);
    current += std::to_string(s);
    current += ',';
    if (!phrases.contains(current)) {
      phrases.insert(current);
      current.clear();
    }
  }
  // A trailing partial phrase is by construction a duplicate and not counted.
  return static_cast<double>(phrases.size()) / static_cast<double>(symbols.size());
}

std::optional<double> oracle_change_quantiles(const std::vector<double>& x, double ql,
                                              double qh, bool isabs,
                                              const std::string& aggr) {
  if (ql >= qh) return 0.0;
  const double lo = sorted_quantile(x, ql);
  const double hi = sorted_quantile(x, qh);
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const bool a_in = x[i] >= lo && x[i] <= hi;
    const bool b_in = x[i + 1] >= lo && x[i + 1] <= hi;
    if (a_in && b_in) {
      double d = x[i + 1] - x[i];
      if (isabs) d = std::fabs(d);
      diffs.push_back(d);
    }
  }
  if (diffs.empty()) return 0.0;
  if (aggr == "mean") return mean_of(diffs);
  if (aggr == "var") return pop_variance(diffs);
  if (aggr == "max") return *std::max_element(diffs.begin(), diffs.end());
  return *std::min_element(diffs.begin(), diffs.end());
}

std::optional<double> oracle_agg_autocorrelation(const std::vector<double>& x,
                                                 const std::string& aggr, int maxlag) {
  const std::size_t n = x.size();
  const std::size_t last = std::min<std::size_t>(static_cast<std::size_t>(maxlag), n - 1);
  const double var = pop_variance(x);
  std::vector<double> acfs;
  for (std::size_t lag = 1; lag <= last; ++lag) {
    if (var < 1e-10) {
      acfs.push_back(0.0);
      continue;
    }
    const auto r = acf_at(x, lag);
    acfs.push_back(r.value_or(0.0));
  }
  if (acfs.empty()) return std::nullopt;
  if (aggr == "mean") return mean_of(acfs);
  if (aggr == "median") return median_of(acfs);
  return pop_variance(acfs);
}

std::optional<double> oracle_energy_ratio(const std::vector<double>& x, int num_segments,
                                          int focus) {
  const std::size_t n = x.size();
  const auto k = static_cast<std::size_t>(num_segments);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  const auto f = static_cast<std::size_t>(focus);
  const std::size_t start = f * base + std::min(f, extra);
  const std::size_t len = base + (f < extra ? 1 : 0);
  double total = 0.0;
  for (double v : x) total += v * v;
  if (total == 0.0) return std::nullopt;
  double part = 0.0;
  for (std::size_t i = start; i < start + len && i < n; ++i) part += x[i] * x[i];
  return part / total;
}

std::optional<double> oracle_index_mass_quantile(const std::vector<double>& x, double q) {
  double total = 0.0;
  for (double v : x) total += std::fabs(v);
  if (total == 0.0) return std::nullopt;
  double cum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cum += std::fabs(x[i]);
    if (cum / total >= q) {
      return static_cast<double>(i + 1) / static_cast<double>(x.size());
    }
  }
  return 1.0;
}

std::optional<double> oracle_number_peaks(const std::vector<double>& x, int support) {
  const std::size_t n = x.size();
  const auto w = static_cast<std::size_t>(support);
  if (n <= 2 * w) return 0.0;
  std::size_t count = 0;
  for (std::size_t i = w; i + w < n; ++i) {
    bool peak = true;
    for (std::size_t j = 1; j <= w && peak; ++j) {
      if (!(x[i] > x[i - j] && x[i] > x[i + j])) peak = false;
    }
    if (peak) ++count;
  }
  return static_cast<double>(count);
}

std::optional<double> oracle_binned_entropy(const std::vector<double>& x, int max_bins) {
  const auto symbols = equal_width_bins(x, max_bins);
  std::vector<double> counts(static_cast<std::size_t>(max_bins), 0.0);
  for (int s : symbols) counts[static_cast<std::size_t>(s)] += 1.0;
  double entropy = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / static_cast<double>(symbols.size());
    entropy -= p * std::log(p);
  }
  return entropy;
}

}  // namespace

std::vector<std::complex<double>> naive_rdft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) *
                           static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[k] = acc;
  }
  return out;
}

std::optional<double> oracle_feature(const ecgbench::tsfeat::FeatureSpec& spec,
                                     const std::vector<double>& x) {
  const std::string& g = spec.group;
  const std::size_t n = x.size();

  if (g == "maximum") return *std::max_element(x.begin(), x.end());

  if (g == "kurtosis") {
    const double m2 = central_moment(x, 2);
    if (m2 < 1e-10) return std::nullopt;
    return central_moment(x, 4) / (m2 * m2) - 3.0;
  }

  if (g == "skewness") {
    const double m2 = central_moment(x, 2);
    if (m2 < 1e-10) return std::nullopt;
    return central_moment(x, 3) / std::pow(m2, 1.5);
  }

  if (g == "quantile") return sorted_quantile(x, spec.number("q"));

  if (g == "count_below") {
    const double t = spec.number("t");
    std::size_t c = 0;
    for (double v : x) {
      if (v <= t) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(n);
  }

  if (g == "count_above") {
    const double t = spec.number("t");
    std::size_t c = 0;
    for (double v : x) {
      if (v >= t) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(n);
  }

  if (g == "range_count") {
    const double lo = spec.number("min");
    const double hi = spec.number("max");
    std::size_t c = 0;
    for (double v : x) {
      if (v >= lo && v < hi) ++c;
    }
    return static_cast<double>(c);
  }

  if (g == "number_crossing_m") {
    const double m = spec.number("m");
    std::size_t c = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if ((x[i] > m) != (x[i + 1] > m)) ++c;
    }
    return static_cast<double>(c);
  }

  if (g == "ratio_beyond_r_sigma") {
    const double r = spec.number("r");
    const double mu = mean_of(x);
    const double sd = std::sqrt(pop_variance(x));
    std::size_t c = 0;
    for (double v : x) {
      if (std::fabs(v - mu) > r * sd) ++c;
    }
    return static_cast<double>(c) / static_cast<double>(n);
  }

  if (g == "autocorrelation") {
    return acf_at(x, static_cast<std::size_t>(spec.integer("lag")));
  }

  if (g == "agg_autocorrelation") {
    return oracle_agg_autocorrelation(x, spec.text("f_agg"),
                                      static_cast<int>(spec.integer("maxlag")));
  }

  if (g == "energy_ratio_by_chunks") {
    return oracle_energy_ratio(x, static_cast<int>(spec.integer("num_segments")),
                               static_cast<int>(spec.integer("segment_focus")));
  }

  if (g == "index_mass_quantile") return oracle_index_mass_quantile(x, spec.number("q"));

  if (g == "lempel_ziv_complexity") {
    return oracle_lempel_ziv(x, static_cast<int>(spec.integer("bins")));
  }

  if (g == "spkt_welch_density") {
    return oracle_spkt_welch(x, static_cast<std::size_t>(spec.integer("coeff")));
  }

  if (g == "change_quantiles") {
    return oracle_change_quantiles(x, spec.number("ql"), spec.number("qh"),
                                   spec.text("isabs") == "true", spec.text("f_agg"));
  }

  if (g == "number_peaks") {
    return oracle_number_peaks(x, static_cast<int>(spec.integer("n")));
  }

  if (g == "cwt_coefficients") {
    return oracle_cwt(x, static_cast<std::size_t>(spec.integer("coeff")),
                      spec.number("w"));
  }

  if (g == "fft_coefficient") {
    return oracle_fft_coefficient(x, static_cast<std::size_t>(spec.integer("coeff")),
                                  spec.text("attr"));
  }

  if (g == "fft_aggregated") return oracle_fft_aggregated(x, spec.text("aggtype"));

  if (g == "benford_correlation") return oracle_benford(x);

  if (g == "binned_entropy") {
    return oracle_binned_entropy(x, static_cast<int>(spec.integer("max_bins")));
  }

  throw std::runtime_error("no oracle for feature group: " + g);
}

OracleBatteryResult run_feature_oracle_battery(std::size_t num_series,
                                               std::size_t min_len, std::size_t max_len,
                                               std::uint64_t seed, double tol) {
  const auto specs = ecgbench::tsfeat::default_specs();
  ecgbench::Rng rng(seed);
  OracleBatteryResult result;

  for (std::size_t s = 0; s < num_series; ++s) {
    const std::size_t len =
        min_len + static_cast<std::size_t>(rng.uniform_below(max_len - min_len + 1));
    std::vector<double> series(len);
    // Mix of scales and occasional exact zeros / repeats so that the
    // degenerate branches (zero energy, ties, clipped bins) get exercised.
    const int flavour = static_cast<int>(rng.uniform_below(4));
    for (auto& v : series) {
      switch (flavour) {
        case 0: v = rng.normal(0.0, 1.0); break;
        case 1: v = rng.uniform(-5.0, 5.0); break;
        case 2: v = std::round(rng.uniform(-3.0, 3.0)); break;
        default: v = rng.normal(0.0, 1.0) * 100.0; break;
      }
    }
    ecgbench::tsfeat::SeriesContext ctx(series);
    for (const auto& spec : specs) {
      const auto got = ecgbench::tsfeat::compute_feature(spec, ctx);
      const auto want = oracle_feature(spec, series);
      ++result.comparisons;
      bool ok = false;
      if (got.has_value() != want.has_value()) {
        ok = false;
      } else if (!got.has_value()) {
        ok = true;
      } else {
        ok = near(*got, *want, tol);
      }
      if (!ok) {
        ++result.mismatches;
        if (result.first_mismatch.empty()) {
          std::ostringstream oss;
          oss << spec.name() << " on series " << s << " (len " << len << "): library=";
          if (got) {
            oss << *got;
          } else {
            oss << "missing";
          }
          oss << " oracle=";
          if (want) {
            oss << *want;
          } else {
            oss << "missing";
          }
          result.first_mismatch = oss.str();
        }
      }
    }
  }
  return result;
}

}  // namespace testsupport
