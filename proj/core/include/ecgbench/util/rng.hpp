#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace ecgbench {

// Deterministic random source. The engine (std::mt19937_64) and every
// distribution below are fully specified here, so a given seed produces the
// same stream on every platform. std::uniform_* distributions are
// implementation-defined and must not be used anywhere in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for a named pipeline stage ("split", "init",
  // "dropout", "search"). Derived by mixing the stage name into the master
  // seed so stages never share state implicitly.
  static Rng substream(std::uint64_t master_seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates shuffle, high-to-low, using uniform_below.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace ecgbench
