#include "phagraph/rng.hpp"

#include <cmath>

namespace phagraph {

double Rng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = next_double();
  double u2 = next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag) {
  Rng mix(root ^ (tag * 0xd6e8feb86659fd93ULL + 0xa5a5a5a5a5a5a5a5ULL));
  mix.next_u64();
  return mix.next_u64();
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag_a, std::uint64_t tag_b) {
  return derive_seed(derive_seed(root, tag_a), tag_b);
}

}  // namespace phagraph
