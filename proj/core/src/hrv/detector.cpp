#include "ecgbench/hrv/detector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "ecgbench/errors.hpp"

namespace ecgbench::hrv {
namespace {

constexpr double kThresholdFraction = 0.45;
constexpr double kRefractoryS = 0.2;
constexpr double kEnvelopeWindowS = 0.08;
constexpr double kSearchBackFactor = 1.5;
constexpr double kRefineWindowS = 0.1;
constexpr std::size_t kPeakMemory = 8;

// Causal moving average of the rectified first difference.
std::vector<double> envelope(const std::vector<double>& x, int fs) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) d[i] = std::abs(x[i] - x[i - 1]);

  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(kEnvelopeWindowS * fs)));
  std::vector<double> env(n, 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += d[i];
    if (i >= window) running -= d[i - window];
    env[i] = running / static_cast<double>(std::min(i + 1, window));
  }
  return env;
}

struct Candidate {
  std::size_t index;
  double height;
};

// Leftmost sample of each local maximum of the envelope.
std::vector<Candidate> local_maxima(const std::vector<double>& env) {
  std::vector<Candidate> out;
  for (std::size_t i = 1; i + 1 < env.size(); ++i) {
    if (env[i] > env[i - 1] && env[i] >= env[i + 1]) {
      out.push_back(Candidate{i, env[i]});
    }
  }
  return out;
}

class AdaptiveState {
 public:
  explicit AdaptiveState(double bootstrap) : bootstrap_(bootstrap) {}

  double threshold() const {
    if (recent_.empty()) return kThresholdFraction * bootstrap_;
    double sum = 0.0;
    for (double h : recent_) sum += h;
    return kThresholdFraction * sum / static_cast<double>(recent_.size());
  }

  // Mean of the last up-to-8 accepted RR intervals, 0 when undefined.
  double mean_rr() const {
    if (rr_.empty()) return 0.0;
    double sum = 0.0;
    for (double rr : rr_) sum += rr;
    return sum / static_cast<double>(rr_.size());
  }

  void accept(std::size_t index, double height) {
    if (!accepted_.empty()) {
      rr_.push_back(static_cast<double>(index - accepted_.back()));
      if (rr_.size() > kPeakMemory) rr_.pop_front();
    }
    accepted_.push_back(index);
    recent_.push_back(height);
    if (recent_.size() > kPeakMemory) recent_.pop_front();
  }

  const std::vector<std::size_t>& accepted() const { return accepted_; }

 private:
  double bootstrap_;
  std::deque<double> recent_;
  std::deque<double> rr_;  // in samples
  std::vector<std::size_t> accepted_;
};

}  // namespace

RPeakList detect_rpeaks(const Signal& filtered) {
  const int fs = filtered.sampling_rate_hz;
  if (fs <= 0) throw RangeError("sampling rate must be positive");
  const std::size_t n = filtered.samples.size();
  if (n < static_cast<std::size_t>(2 * fs)) {
    throw LengthError("detector needs at least 2 s of samples");
  }

  const std::vector<double> env = envelope(filtered.samples, fs);
  const std::vector<Candidate> candidates = local_maxima(env);
  const auto refractory =
      static_cast<std::size_t>(std::lround(kRefractoryS * fs));

  double bootstrap = 0.0;
  const std::size_t lead_in = std::min<std::size_t>(
      n, static_cast<std::size_t>(2 * fs));
  for (std::size_t i = 0; i < lead_in; ++i) bootstrap = std::max(bootstrap, env[i]);

  AdaptiveState state(bootstrap);
  std::vector<Candidate> rejected;  // since the last accepted peak
  for (const Candidate& cand : candidates) {
    const bool have_last = !state.accepted().empty();
    const std::size_t last = have_last ? state.accepted().back() : 0;
    if (have_last && cand.index - last < refractory) continue;

    // Search-back: a long gap suggests a missed beat among the rejected
    // candidates; retry them against half threshold.
    const double mean_rr = state.mean_rr();
    if (have_last && mean_rr > 0.0 &&
        static_cast<double>(cand.index - last) > kSearchBackFactor * mean_rr) {
      const Candidate* best = nullptr;
      for (const Candidate& r : rejected) {
        if (r.index - last < refractory) continue;
        if (cand.index - r.index < refractory) continue;
        if (r.height <= 0.5 * state.threshold()) continue;
        if (best == nullptr || r.height > best->height) best = &r;
      }
      if (best != nullptr) {
        state.accept(best->index, best->height);
        rejected.clear();
      }
    }

    if (cand.height > state.threshold()) {
      state.accept(cand.index, cand.height);
      rejected.clear();
    } else {
      rejected.push_back(cand);
    }
  }

  // Refine each fiducial to the signal maximum within +-100 ms, then
  // re-enforce ordering and the refractory (keeping the taller peak).
  const auto refine =
      static_cast<std::size_t>(std::lround(kRefineWindowS * fs));
  RPeakList peaks;
  peaks.sampling_rate_hz = fs;
  for (std::size_t fiducial : state.accepted()) {
    const std::size_t lo = fiducial >= refine ? fiducial - refine : 0;
    const std::size_t hi = std::min(n - 1, fiducial + refine);
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i <= hi; ++i) {
      if (filtered.samples[i] > filtered.samples[best]) best = i;
    }
    if (!peaks.indices.empty()) {
      const std::size_t prev = peaks.indices.back();
      if (best <= prev || best - prev < refractory) {
        if (filtered.samples[best] > filtered.samples[prev] && best > prev) {
          peaks.indices.back() = best;
        }
        continue;
      }
    }
    peaks.indices.push_back(best);
  }
  return peaks;
}

std::vector<double> to_nn_intervals(const RPeakList& peaks) {
  if (peaks.indices.size() < 3) {
    throw InsufficientPeaksError("need at least 3 peaks for NN intervals");
  }
  if (peaks.sampling_rate_hz <= 0) {
    throw RangeError("sampling rate must be positive");
  }
  const double fs = peaks.sampling_rate_hz;

  std::vector<double> accepted;
  std::deque<double> window;  // last 5 accepted intervals
  for (std::size_t i = 1; i < peaks.indices.size(); ++i) {
    const double rr =
        static_cast<double>(peaks.indices[i] - peaks.indices[i - 1]) / fs;
    if (rr < 0.3 || rr > 2.0) continue;
    if (!window.empty()) {
      std::vector<double> sorted(window.begin(), window.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      const double median = sorted.size() % 2 == 1
                                ? sorted[mid]
                                : 0.5 * (sorted[mid - 1] + sorted[mid]);
      if (std::abs(rr - median) > 0.2 * median) continue;
    }
    accepted.push_back(rr);
    window.push_back(rr);
    if (window.size() > 5) window.pop_front();
  }
  return accepted;
}

}  // namespace ecgbench::hrv
