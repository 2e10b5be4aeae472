#pragma once

#include <cmath>
#include <cstdint>

namespace fracdiff {

// Counter-based stream: output n of the stream keyed by `key` is a fixed
// bijective mix of key + n * golden gamma (the SplitMix64 construction).
// A stream is cheap to create, so every particle owns one keyed by
// (seed, particle index); results do not depend on how particles are
// distributed over threads.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * kGolden); }

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  double normal() {
    // Box-Muller without caching the second variate, so the draw count per
    // call is fixed.
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(6.283185307179586 * uniform());
  }

  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t position) { counter_ = position; }

private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace fracdiff
