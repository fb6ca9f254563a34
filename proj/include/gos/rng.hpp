#pragma once

#include <cstdint>
#include <string_view>

namespace gos {

// SplitMix64. Small state, full 64-bit output, identical sequences on every
// platform for a given seed, which is all the simulator needs.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

// Deterministic RNG wrapper. std::uniform_*_distribution is not pinned by the
// standard, so ranges are drawn here with explicit, stable algorithms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_.next(); }

  // Inclusive range, rejection sampled to avoid modulo bias.
  uint64_t uniform_u64(uint64_t lo, uint64_t hi) {
    if (lo >= hi) return lo;
    const uint64_t span = hi - lo + 1;
    if (span == 0) return next_u64();  // full range
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return lo + v % span;
  }

  int64_t uniform_i64(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform_u64(0, static_cast<uint64_t>(hi - lo)));
  }

  // 53-bit mantissa double in [0, 1).
  double uniform_real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real01(); }

 private:
  SplitMix64 gen_;
};

// One-shot mixing of several 64-bit words into one, for keyed coin flips.
inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  return g.next();
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c) { return hash_mix(hash_mix(a, b), c); }

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  return hash_mix(hash_mix(a, b, c), d);
}

// FNV-1a for stable string keys (node ids).
inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace gos
