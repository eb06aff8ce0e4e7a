#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vgdial {

// Deterministic RNG used everywhere generation happens.  mt19937_64 output is
// fully specified by the standard; we derive doubles/ints ourselves instead of
// going through std distributions, whose draw sequences are
// implementation-defined and would break byte-identical corpora across
// toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // uniform in [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);  // bias negligible for small spans
  }

  bool bernoulli(double p) { return uniform() < p; }

  // index drawn according to non-negative weights (need not be normalized)
  int weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      x -= weights[i];
      if (x < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(v.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // independent child stream; used to give each scene/dialogue its own
  // deterministic sequence regardless of how much entropy siblings consume
  Rng fork(std::uint64_t salt) {
    std::uint64_t s = 0x9e3779b97f4a7c15ull * (salt + 1) ^ engine_();
    return Rng(s);
  }

private:
  std::mt19937_64 engine_;
};

// stable stream derivation without consuming parent state
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t x = base ^ (0x9e3779b97f4a7c15ull * (stream + 1)) ^ (0xbf58476d1ce4e5b9ull * (index + 1));
  x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27; x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace vgdial
