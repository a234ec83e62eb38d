#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace conewalk {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-item seed: mix64(master ^ mix64(index + golden)). Used for path seeds
/// (master seed, path index) and for sub-streams inside a path.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: draw n of stream `key` is a pure function of
/// (key, n), namely the n-th output of SplitMix64 seeded with `key`. Nothing
/// is consumed, so draws can be addressed in any order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on (0, 1].
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on the uniform pair (2n, 2n + 1).
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(std::uint64_t counter, double mean) const noexcept {
    return -mean * std::log(uniform(counter));
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

/// Stream tags for the sub-streams of one path seed.
enum class Stream : std::uint64_t { brownian = 1, jumps = 2 };

inline CounterRng stream(std::uint64_t path_seed, Stream tag) {
  return CounterRng(derive_seed(path_seed, static_cast<std::uint64_t>(tag)));
}

}  // namespace conewalk
