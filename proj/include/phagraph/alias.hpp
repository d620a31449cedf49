#pragma once

#include <span>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/rng.hpp"

namespace phagraph {

// Vose alias table: O(n) build, O(1) draws from a discrete distribution
// proportional to the given nonnegative weights.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights) { build(weights); }

  void build(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }

  std::size_t sample(Rng& rng) const {
    const std::size_t slot = static_cast<std::size_t>(rng.next_below(prob_.size()));
    return rng.next_double() < prob_[slot] ? slot : alias_[slot];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace phagraph
