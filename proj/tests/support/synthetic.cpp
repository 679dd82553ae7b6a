#include "synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ecgbench/util/rng.hpp"

namespace testsupport {
namespace {

void add_gaussian(std::vector<double>& samples, double center_s, double amp,
                  double sigma_s, int fs) {
  const double half_width_s = 5.0 * sigma_s;
  const auto lo = static_cast<long long>(
      std::floor((center_s - half_width_s) * fs));
  const auto hi = static_cast<long long>(
      std::ceil((center_s + half_width_s) * fs));
  for (long long i = std::max<long long>(lo, 0);
       i <= hi && i < static_cast<long long>(samples.size()); ++i) {
    const double t = static_cast<double>(i) / fs - center_s;
    samples[static_cast<std::size_t>(i)] +=
        amp * std::exp(-t * t / (2.0 * sigma_s * sigma_s));
  }
}

}  // namespace

SyntheticEcg make_ecg(int sampling_rate_hz, const std::vector<double>& rr_s,
                      double noise_sd, std::uint64_t seed, double amplitude) {
  double duration_s = 1.0;
  for (double rr : rr_s) duration_s += rr;
  duration_s += 1.0;  // trailing margin after the last beat

  const auto n = static_cast<std::size_t>(
      std::llround(duration_s * sampling_rate_hz));
  std::vector<double> clean(n, 0.0);

  SyntheticEcg out;
  double beat_s = 0.5;
  std::vector<double> beat_times;
  beat_times.push_back(beat_s);
  for (double rr : rr_s) {
    beat_s += rr;
    beat_times.push_back(beat_s);
  }
  for (double t : beat_times) {
    add_gaussian(clean, t, amplitude, 0.012, sampling_rate_hz);
    add_gaussian(clean, t + 0.18, 0.25 * amplitude, 0.040, sampling_rate_hz);
    out.peak_indices.push_back(
        static_cast<std::size_t>(std::llround(t * sampling_rate_hz)));
  }

  ecgbench::Rng rng(seed);
  double signal_power = 0.0;
  double noise_power = 0.0;
  out.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0;
    out.signal.samples[i] = clean[i] + noise;
    signal_power += clean[i] * clean[i];
    noise_power += noise * noise;
  }
  out.signal.sampling_rate_hz = sampling_rate_hz;
  out.snr_db = noise_power > 0.0
                   ? 10.0 * std::log10(signal_power / noise_power)
                   : 1e9;
  return out;
}

std::vector<double> constant_rr(double period_s, double duration_s) {
  std::vector<double> rr;
  for (double total = 0.0; total + period_s <= duration_s;
       total += period_s) {
    rr.push_back(period_s);
  }
  return rr;
}

std::vector<double> sweep_rr(double bpm_start, double bpm_end,
                             double duration_s) {
  std::vector<double> rr;
  double t = 0.0;
  while (t < duration_s) {
    const double frac = t / duration_s;
    const double bpm = bpm_start + (bpm_end - bpm_start) * frac;
    const double period = 60.0 / bpm;
    rr.push_back(period);
    t += period;
  }
  return rr;
}

}  // namespace testsupport
