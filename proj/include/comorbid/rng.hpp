#pragma once

#include <cstdint>

namespace comorbid {

// SplitMix64 (Steele, Lea & Flood, 2014). Fully specified 64-bit generator,
// deterministic across platforms. Streams derived through derive_stream() are
// independent per index, so row i of a simulated dataset or replicate r of a
// resampling run never depends on how many rows/replicates precede it.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// SplitMix64 finalizer as a standalone mixing function.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Generator for substream `index` of master seed `seed`.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace comorbid
