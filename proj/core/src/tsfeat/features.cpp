#include "ecgbench/tsfeat/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/fft.hpp"

namespace ecgbench::tsfeat {
namespace {

using Missing = std::optional<double>;

double checked_fraction(long long count, std::size_t n) {
  return static_cast<double>(count) / static_cast<double>(n);
}

// exp-style zero guard shared by the degenerate-variance rules.
bool near_zero_variance(double variance) { return variance < 1e-10; }

Missing fft_coefficient(const FeatureSpec& spec, const SeriesContext& ctx) {
  const long long coeff = spec.integer("coeff");
  const std::string& attr = spec.text("attr");
  if (coeff < 0) throw SpecError("fft_coefficient: coeff must be >= 0");
  const auto& spectrum = ctx.spectrum();
  if (static_cast<std::size_t>(coeff) >= spectrum.size()) return std::nullopt;
  const std::complex<double> c = spectrum[static_cast<std::size_t>(coeff)];
  if (attr == "real") return c.real();
  if (attr == "imag") return c.imag();
  if (attr == "abs") return std::abs(c);
  if (attr == "angle") {
    // Degrees, matching the convention the angle grid was defined with.
    return std::atan2(c.imag(), c.real()) * 180.0 / std::numbers::pi;
  }
  throw SpecError("fft_coefficient: unknown attr '" + attr + "'");
}

Missing ratio_beyond_r_sigma(const FeatureSpec& spec,
                             const SeriesContext& ctx) {
  const double r = spec.number("r");
  const double mean = ctx.mean();
  const double bound = r * std::sqrt(ctx.variance());
  long long count = 0;
  for (double v : ctx.values()) {
    if (std::abs(v - mean) > bound) ++count;
  }
  return checked_fraction(count, ctx.size());
}

// sum_t (x_t - mu)(x_{t+lag} - mu) / ((n - lag) * population variance)
Missing autocorrelation_at(const SeriesContext& ctx, long long lag) {
  const std::size_t n = ctx.size();
  if (lag < 0) throw SpecError("autocorrelation: lag must be >= 0");
  if (static_cast<std::size_t>(lag) >= n) return std::nullopt;
  if (near_zero_variance(ctx.variance())) return std::nullopt;
  const double mean = ctx.mean();
  const auto& x = ctx.values();
  double sum = 0.0;
  for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t) {
    sum += (x[t] - mean) * (x[t + static_cast<std::size_t>(lag)] - mean);
  }
  return sum /
         (static_cast<double>(n - static_cast<std::size_t>(lag)) *
          ctx.variance());
}

Missing autocorrelation(const FeatureSpec& spec, const SeriesContext& ctx) {
  return autocorrelation_at(ctx, spec.integer("lag"));
}

Missing energy_ratio_by_chunks(const FeatureSpec& spec,
                               const SeriesContext& ctx) {
  const long long segments = spec.integer("num_segments");
  const long long focus = spec.integer("segment_focus");
  if (segments < 1) throw SpecError("energy_ratio_by_chunks: bad segments");
  if (focus < 0 || focus >= segments) {
    throw SpecError("energy_ratio_by_chunks: focus outside segments");
  }
  const auto& x = ctx.values();
  double total = 0.0;
  for (double v : x) total += v * v;
  if (total == 0.0) return std::nullopt;

  // Chunk layout follows even splitting with the remainder spread over the
  // first chunks: the first (n mod k) chunks hold one extra sample.
  const std::size_t n = x.size();
  const auto k = static_cast<std::size_t>(segments);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  const auto f = static_cast<std::size_t>(focus);
  const std::size_t start = f * base + std::min(f, extra);
  const std::size_t len = base + (f < extra ? 1 : 0);
  double chunk = 0.0;
  for (std::size_t i = start; i < start + len; ++i) chunk += x[i] * x[i];
  return chunk / total;
}

Missing index_mass_quantile(const FeatureSpec& spec,
                            const SeriesContext& ctx) {
  const double q = spec.number("q");
  if (!(q > 0.0) || !(q < 1.0)) {
    throw SpecError("index_mass_quantile: q must be in (0, 1)");
  }
  const auto& x = ctx.values();
  double total = 0.0;
  for (double v : x) total += std::abs(v);
  if (total == 0.0) return std::nullopt;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cumulative += std::abs(x[i]);
    if (cumulative / total >= q) {
      return static_cast<double>(i + 1) / static_cast<double>(x.size());
    }
  }
  return 1.0;
}

// Equal-width bin of v over [lo, hi], top bin right-inclusive.
std::size_t bin_index(double v, double lo, double hi, std::size_t bins) {
  const auto raw =
      static_cast<long long>(std::floor((v - lo) * static_cast<double>(bins) /
                                        (hi - lo)));
  return static_cast<std::size_t>(
      std::clamp<long long>(raw, 0, static_cast<long long>(bins) - 1));
}

Missing lempel_ziv_complexity(const FeatureSpec& spec,
                              const SeriesContext& ctx) {
  const long long bins = spec.integer("bins");
  if (bins < 1) throw SpecError("lempel_ziv_complexity: bins must be >= 1");
  const auto& x = ctx.values();
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  std::vector<std::size_t> sequence(x.size(), 0);
  if (*min_it < *max_it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      sequence[i] = bin_index(x[i], *min_it, *max_it,
                              static_cast<std::size_t>(bins));
    }
  }
  // Greedy phrase scan: grow the current phrase until it is new, record it,
  // restart after it.
  std::set<std::vector<std::size_t>> phrases;
  std::size_t start = 0;
  std::size_t length = 1;
  while (start + length <= sequence.size()) {
    const std::vector<std::size_t> phrase(
        sequence.begin() + static_cast<std::ptrdiff_t>(start),
        sequence.begin() + static_cast<std::ptrdiff_t>(start + length));
    if (phrases.contains(phrase)) {
      ++length;
    } else {
      phrases.insert(phrase);
      start += length;
      length = 1;
    }
  }
  return static_cast<double>(phrases.size()) /
         static_cast<double>(sequence.size());
}

Missing agg_autocorrelation(const FeatureSpec& spec,
                            const SeriesContext& ctx) {
  const std::string& f_agg = spec.text("f_agg");
  const long long maxlag = spec.integer("maxlag");
  if (maxlag < 1) throw SpecError("agg_autocorrelation: maxlag must be >= 1");
  const std::size_t last =
      std::min<std::size_t>(static_cast<std::size_t>(maxlag), ctx.size() - 1);

  std::vector<double> acf(last, 0.0);
  if (!near_zero_variance(ctx.variance())) {
    for (std::size_t lag = 1; lag <= last; ++lag) {
      acf[lag - 1] =
          autocorrelation_at(ctx, static_cast<long long>(lag)).value();
    }
  }
  if (acf.empty()) return std::nullopt;
  if (f_agg == "mean") {
    double sum = 0.0;
    for (double v : acf) sum += v;
    return sum / static_cast<double>(acf.size());
  }
  if (f_agg == "median") {
    std::sort(acf.begin(), acf.end());
    const std::size_t mid = acf.size() / 2;
    return acf.size() % 2 == 1 ? acf[mid]
                               : 0.5 * (acf[mid - 1] + acf[mid]);
  }
  if (f_agg == "var") {
    double mean = 0.0;
    for (double v : acf) mean += v;
    mean /= static_cast<double>(acf.size());
    double var = 0.0;
    for (double v : acf) var += (v - mean) * (v - mean);
    return var / static_cast<double>(acf.size());
  }
  throw SpecError("agg_autocorrelation: unknown f_agg '" + f_agg + "'");
}

Missing range_count(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double lo = spec.number("min");
  const double hi = spec.number("max");
  long long count = 0;
  for (double v : ctx.values()) {
    if (v >= lo && v < hi) ++count;
  }
  return static_cast<double>(count);
}

// Single-segment Welch density: periodic Hann window over the mean-removed
// series, fs = 1, density scaling, one-sided doubling for interior bins.
Missing spkt_welch_density(const FeatureSpec& spec,
                           const SeriesContext& ctx) {
  const long long coeff = spec.integer("coeff");
  if (coeff < 0) throw SpecError("spkt_welch_density: coeff must be >= 0");
  const std::size_t n = ctx.size();
  const double mean = ctx.mean();

  std::vector<double> windowed(n);
  double window_power = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(n));
    windowed[j] = (ctx.values()[j] - mean) * w;
    window_power += w * w;
  }
  const std::vector<std::complex<double>> spectrum = rfft(windowed);
  if (static_cast<std::size_t>(coeff) >= spectrum.size()) return std::nullopt;

  const double raw = std::norm(spectrum[static_cast<std::size_t>(coeff)]) /
                     window_power;
  const bool is_dc = coeff == 0;
  const bool is_nyquist =
      n % 2 == 0 && static_cast<std::size_t>(coeff) + 1 == spectrum.size();
  return (is_dc || is_nyquist) ? raw : 2.0 * raw;
}

Missing change_quantiles(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double ql = spec.number("ql");
  const double qh = spec.number("qh");
  const std::string& f_agg = spec.text("f_agg");
  const std::string& isabs = spec.text("isabs");
  if (isabs != "true" && isabs != "false") {
    throw SpecError("change_quantiles: isabs must be 'true' or 'false'");
  }
  if (ql >= qh) return 0.0;
  const double lo = ctx.quantile(ql);
  const double hi = ctx.quantile(qh);

  const auto& x = ctx.values();
  std::vector<double> changes;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const bool inside_both = x[i] >= lo && x[i] <= hi && x[i + 1] >= lo &&
                             x[i + 1] <= hi;
    if (!inside_both) continue;
    const double d = x[i + 1] - x[i];
    changes.push_back(isabs == "true" ? std::abs(d) : d);
  }
  if (changes.empty()) return 0.0;
  double mean = 0.0;
  for (double v : changes) mean += v;
  mean /= static_cast<double>(changes.size());
  if (f_agg == "mean") return mean;
  if (f_agg == "var") {
    double var = 0.0;
    for (double v : changes) var += (v - mean) * (v - mean);
    return var / static_cast<double>(changes.size());
  }
  throw SpecError("change_quantiles: unknown f_agg '" + f_agg + "'");
}

Missing quantile_feature(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double q = spec.number("q");
  if (!(q >= 0.0) || !(q <= 1.0)) {
    throw SpecError("quantile: q must be in [0, 1]");
  }
  return ctx.quantile(q);
}

Missing number_peaks(const FeatureSpec& spec, const SeriesContext& ctx) {
  const long long support = spec.integer("n");
  if (support < 1) throw SpecError("number_peaks: n must be >= 1");
  const auto& x = ctx.values();
  const auto w = static_cast<std::size_t>(support);
  if (x.size() <= 2 * w) return 0.0;
  long long count = 0;
  for (std::size_t i = w; i + w < x.size(); ++i) {
    bool peak = true;
    for (std::size_t j = 1; j <= w && peak; ++j) {
      peak = x[i] > x[i - j] && x[i] > x[i + j];
    }
    if (peak) ++count;
  }
  return static_cast<double>(count);
}

Missing count_below(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double t = spec.number("t");
  long long count = 0;
  for (double v : ctx.values()) {
    if (v <= t) ++count;
  }
  return checked_fraction(count, ctx.size());
}

Missing count_above(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double t = spec.number("t");
  long long count = 0;
  for (double v : ctx.values()) {
    if (v >= t) ++count;
  }
  return checked_fraction(count, ctx.size());
}

// Ricker (Mexican hat) wavelet, scipy parameterization.
std::vector<double> ricker(std::size_t points, double a) {
  std::vector<double> w(points);
  const double amplitude =
      2.0 / (std::sqrt(3.0 * a) * std::pow(std::numbers::pi, 0.25));
  for (std::size_t m = 0; m < points; ++m) {
    const double t =
        static_cast<double>(m) - (static_cast<double>(points) - 1.0) / 2.0;
    const double scaled = t * t / (a * a);
    w[m] = amplitude * (1.0 - scaled) * std::exp(-scaled / 2.0);
  }
  return w;
}

// 'same'-mode convolution with a Ricker wavelet of width w and
// min(10w, n) points, evaluated at index coeff.
Missing cwt_coefficients(const FeatureSpec& spec, const SeriesContext& ctx) {
  const long long coeff = spec.integer("coeff");
  const double width = spec.number("w");
  if (coeff < 0) throw SpecError("cwt_coefficients: coeff must be >= 0");
  if (!(width > 0.0)) throw SpecError("cwt_coefficients: w must be > 0");
  const auto& x = ctx.values();
  const std::size_t n = x.size();
  if (static_cast<std::size_t>(coeff) >= n) return std::nullopt;

  const std::size_t points = std::min<std::size_t>(
      static_cast<std::size_t>(std::llround(10.0 * width)), n);
  const std::vector<double> wavelet = ricker(points, width);

  // full[k] = sum_j x[j] wavelet[k - j]; same-mode drops (m-1)/2 leading.
  const auto i = static_cast<std::size_t>(coeff);
  const std::size_t k = i + (points - 1) / 2;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (k < j) break;
    const std::size_t m = k - j;
    if (m < points) acc += x[j] * wavelet[m];
  }
  return acc;
}

Missing number_crossing_m(const FeatureSpec& spec, const SeriesContext& ctx) {
  const double m = spec.number("m");
  const auto& x = ctx.values();
  long long crossings = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if ((x[i] > m) != (x[i + 1] > m)) ++crossings;
  }
  return static_cast<double>(crossings);
}

Missing maximum(const FeatureSpec&, const SeriesContext& ctx) {
  return *std::max_element(ctx.values().begin(), ctx.values().end());
}

// Population central moment of given order.
double central_moment(const SeriesContext& ctx, int order) {
  const double mean = ctx.mean();
  double sum = 0.0;
  for (double v : ctx.values()) sum += std::pow(v - mean, order);
  return sum / static_cast<double>(ctx.size());
}

Missing kurtosis(const FeatureSpec&, const SeriesContext& ctx) {
  const double m2 = ctx.variance();
  if (near_zero_variance(m2)) return std::nullopt;
  // Excess kurtosis with population moments: m4 / m2^2 - 3.
  return central_moment(ctx, 4) / (m2 * m2) - 3.0;
}

Missing skewness(const FeatureSpec&, const SeriesContext& ctx) {
  const double m2 = ctx.variance();
  if (near_zero_variance(m2)) return std::nullopt;
  return central_moment(ctx, 3) / std::pow(m2, 1.5);
}

// Spectral moments over the magnitude spectrum, bin index as the variable.
Missing fft_aggregated(const FeatureSpec& spec, const SeriesContext& ctx) {
  const std::string& aggtype = spec.text("aggtype");
  const auto& spectrum = ctx.spectrum();
  std::vector<double> magnitude(spectrum.size());
  double total = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    magnitude[i] = std::abs(spectrum[i]);
    total += magnitude[i];
  }
  if (total == 0.0) return std::nullopt;

  const auto moment = [&](int order, double center) {
    double sum = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
      sum += std::pow(static_cast<double>(i) - center, order) * magnitude[i];
    }
    return sum / total;
  };
  const double centroid = moment(1, 0.0);
  if (aggtype == "centroid") return centroid;
  const double variance = moment(2, centroid);
  if (aggtype == "variance") return variance;
  // Higher moments are unstable for near-degenerate spectra; the 0.5-bin
  // variance floor mirrors the grid this catalog was defined against.
  if (variance < 0.5) return std::nullopt;
  if (aggtype == "skew") return moment(3, centroid) / std::pow(variance, 1.5);
  if (aggtype == "kurtosis") {
    return moment(4, centroid) / (variance * variance);
  }
  throw SpecError("fft_aggregated: unknown aggtype '" + aggtype + "'");
}

// First significant decimal digit of |v|, by scaling into [1, 10).
int first_digit(double v) {
  double a = std::abs(v);
  if (a == 0.0 || !std::isfinite(a)) return 0;
  while (a >= 10.0) a /= 10.0;
  while (a < 1.0) a *= 10.0;
  return static_cast<int>(a);
}

Missing benford_correlation(const FeatureSpec&, const SeriesContext& ctx) {
  std::array<double, 9> counts{};
  double total = 0.0;
  int distinct = 0;
  for (double v : ctx.values()) {
    const int d = first_digit(v);
    if (d < 1) continue;  // zeros carry no leading digit
    if (counts[static_cast<std::size_t>(d - 1)] == 0.0) ++distinct;
    counts[static_cast<std::size_t>(d - 1)] += 1.0;
    total += 1.0;
  }
  if (distinct < 2) return std::nullopt;

  std::array<double, 9> observed{};
  std::array<double, 9> benford{};
  for (std::size_t d = 0; d < 9; ++d) {
    observed[d] = counts[d] / total;
    benford[d] = std::log10(1.0 + 1.0 / static_cast<double>(d + 1));
  }
  double mean_o = 0.0;
  double mean_b = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    mean_o += observed[d];
    mean_b += benford[d];
  }
  mean_o /= 9.0;
  mean_b /= 9.0;
  double cov = 0.0;
  double var_o = 0.0;
  double var_b = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    cov += (observed[d] - mean_o) * (benford[d] - mean_b);
    var_o += (observed[d] - mean_o) * (observed[d] - mean_o);
    var_b += (benford[d] - mean_b) * (benford[d] - mean_b);
  }
  if (var_o == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_o * var_b);
}

Missing binned_entropy(const FeatureSpec& spec, const SeriesContext& ctx) {
  const long long bins = spec.integer("max_bins");
  if (bins < 1) throw SpecError("binned_entropy: max_bins must be >= 1");
  const auto& x = ctx.values();
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  if (*min_it == *max_it) {
    counts[0] = static_cast<double>(x.size());
  } else {
    for (double v : x) {
      counts[bin_index(v, *min_it, *max_it,
                       static_cast<std::size_t>(bins))] += 1.0;
    }
  }
  double entropy = 0.0;
  for (double c : counts) {
    if (c == 0.0) continue;
    const double p = c / static_cast<double>(x.size());
    entropy -= p * std::log(p);
  }
  return entropy;
}

}  // namespace

SeriesContext::SeriesContext(std::vector<double> series)
    : series_(std::move(series)) {
  if (series_.size() < 2) {
    throw InsufficientDataError("feature series needs at least 2 samples");
  }
  for (double v : series_) {
    if (!std::isfinite(v)) throw DataError("non-finite value in series");
  }
}

double SeriesContext::mean() const {
  if (!mean_) {
    double sum = 0.0;
    for (double v : series_) sum += v;
    mean_ = sum / static_cast<double>(series_.size());
  }
  return *mean_;
}

double SeriesContext::variance() const {
  if (!variance_) {
    const double m = mean();
    double sum = 0.0;
    for (double v : series_) sum += (v - m) * (v - m);
    variance_ = sum / static_cast<double>(series_.size());
  }
  return *variance_;
}

const std::vector<double>& SeriesContext::sorted() const {
  if (sorted_.empty()) {
    sorted_ = series_;
    std::sort(sorted_.begin(), sorted_.end());
  }
  return sorted_;
}

const std::vector<std::complex<double>>& SeriesContext::spectrum() const {
  if (spectrum_.empty()) spectrum_ = rfft(series_);
  return spectrum_;
}

double SeriesContext::quantile(double q) const {
  const auto& s = sorted();
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

std::optional<double> compute_feature(const FeatureSpec& spec,
                                      const SeriesContext& context) {
  using Fn = Missing (*)(const FeatureSpec&, const SeriesContext&);
  static const std::vector<std::pair<std::string, Fn>> dispatch = {
      {"fft_coefficient", fft_coefficient},
      {"ratio_beyond_r_sigma", ratio_beyond_r_sigma},
      {"autocorrelation", autocorrelation},
      {"energy_ratio_by_chunks", energy_ratio_by_chunks},
      {"index_mass_quantile", index_mass_quantile},
      {"lempel_ziv_complexity", lempel_ziv_complexity},
      {"agg_autocorrelation", agg_autocorrelation},
      {"range_count", range_count},
      {"spkt_welch_density", spkt_welch_density},
      {"change_quantiles", change_quantiles},
      {"quantile", quantile_feature},
      {"number_peaks", number_peaks},
      {"count_below", count_below},
      {"cwt_coefficients", cwt_coefficients},
      {"number_crossing_m", number_crossing_m},
      {"maximum", maximum},
      {"kurtosis", kurtosis},
      {"skewness", skewness},
      {"fft_aggregated", fft_aggregated},
      {"benford_correlation", benford_correlation},
      {"binned_entropy", binned_entropy},
      {"count_above", count_above},
  };
  for (const auto& [group, fn] : dispatch) {
    if (group == spec.group) return fn(spec, context);
  }
  throw SpecError("unknown feature group '" + spec.group + "'");
}

std::optional<double> compute_feature(const FeatureSpec& spec,
                                      const std::vector<double>& series) {
  const SeriesContext context(series);
  return compute_feature(spec, context);
}

FeatureVector extract_all(const std::vector<Signal>& leads,
                          const std::vector<FeatureSpec>& specs) {
  if (specs.empty()) throw SpecError("feature spec list is empty");
  FeatureVector out;
  out.names.reserve(leads.size() * specs.size());
  out.values.reserve(leads.size() * specs.size());
  for (std::size_t lead = 0; lead < leads.size(); ++lead) {
    const SeriesContext context(leads[lead].samples);
    const std::string prefix = "lead" + std::to_string(lead) + "__";
    for (const FeatureSpec& spec : specs) {
      out.names.push_back(prefix + spec.name());
      out.values.push_back(compute_feature(spec, context));
    }
  }
  return out;
}

}  // namespace ecgbench::tsfeat
