#pragma once

#include <cstdint>

namespace phagraph {

// SplitMix64. Used both as a standalone generator and to derive independent
// substream seeds from a root seed. Self-contained so that sampled values are
// identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound) via rejection on the top of the range.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller (polar rejection avoided to keep the
  // draw count deterministic per call pair).
  double next_gaussian();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Deterministically derives a substream seed from a root seed and a tag path,
// e.g. derive_seed(root, {stage_id, worker_id}).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag_a, std::uint64_t tag_b);

}  // namespace phagraph
