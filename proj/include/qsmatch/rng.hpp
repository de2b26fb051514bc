#pragma once

#include <cstdint>
#include <random>

namespace qsmatch {

// SplitMix64 finalizer. Used to derive independent stream seeds from a
// master seed plus salts, so trials can be sampled in any order (or in
// parallel) and still reproduce bit-for-bit.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return mix64(base ^ mix64(salt + 0x632be59bd9b4e019ULL));
}

// Deterministic generator wrapper. mt19937_64 output is fully specified by
// the standard, and the uniform/bernoulli draws below avoid the
// implementation-defined std::*_distribution classes, so identical seeds
// reproduce identical samples on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, bound). Multiply-shift; bias is O(bound/2^64).
  int uniform_int(int bound) {
    return static_cast<int>(
        (static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(bound)) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qsmatch
