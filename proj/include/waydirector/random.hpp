#pragma once

#include <cstdint>

namespace waydirector {

// SplitMix64 (Steele, Lea & Flood). Bit-identical on every platform, which is why it
// is used instead of the <random> engines for anything that shapes output text.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Index in [0, n); plain modulo so the mapping is trivial to reproduce elsewhere.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace waydirector
