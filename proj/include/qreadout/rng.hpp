#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace qreadout {

/// SplitMix64 finalizer. Used to turn structured seed tuples into
/// well-mixed 64-bit stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Stream derivation: folds the parts left to right through SplitMix64,
/// seed = mix(...mix(mix(parts[0]) ^ parts[1])... ^ parts[n-1]).
/// Every random stream in the library is seeded this way from the master
/// seed plus a tuple of small integers naming the stream, so results never
/// depend on the order in which streams are consumed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// Stream tags used as the second element of derive_seed tuples.
enum class StreamTag : std::uint64_t {
  shot = 0x5348,
  split = 0x5350,
  model = 0x4d4f,
  shuffle = 0x5355,
  gmm = 0x474d,
  subsample = 0x5342,
  fresh_data = 0x4644,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

/// Seedable generator: mt19937_64 engine with helpers whose draw counts are
/// fixed, so a given seed always produces the same sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  /// Exp(rate) sample; rate must be > 0.
  double exponential(double rate);
  /// Uniform integer in [0, n) by rejection (no modulo bias). n > 0.
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Fisher-Yates shuffle driven by Rng::below.
template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace qreadout
