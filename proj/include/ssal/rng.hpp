#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ssal {

/// Counter-based 64-bit generator: the n-th output is a keyed hash of n, so a
/// stream is fully determined by its key and streams split off by id never
/// share state. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(mix(counter_++ * kGolden + key_) ^ (key_ >> 7)); }

  /// Independent child stream; deterministic in (this key, id).
  [[nodiscard]] CounterRng split(std::uint64_t id) const {
    CounterRng child;
    child.key_ = derive_key(key_, id + 1);
    return child;
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + kGolden) ^ mix(stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Convenience sampler over a CounterRng.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : engine_(seed, stream) {}
  explicit Rng(CounterRng engine) : engine_(engine) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

  [[nodiscard]] Rng split(std::uint64_t id) const { return Rng(engine_.split(id)); }

  CounterRng& engine() { return engine_; }

 private:
  CounterRng engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ssal
