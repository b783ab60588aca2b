#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rac {

/// Counter-based generator: draw k of stream s is a pure function of
/// (seed, s, k), so parallel workers that own distinct streams reproduce the
/// same values regardless of scheduling. Satisfies
/// UniformRandomBitGenerator for use with <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Index drawn with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);

  /// Gamma(shape, 1); shape 0 returns 0.
  double gamma(double shape);

  /// Dirichlet(alpha) draw; zero parameters yield zero components.
  std::vector<double> dirichlet(std::span<const double> alpha);

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rac
