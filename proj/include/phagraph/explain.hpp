#pragma once

#include <cstdint>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/walk.hpp"

namespace phagraph {

// One connecting walk from a device to a target app, truncated at the hit.
struct WalkTrace {
  std::vector<Index> vertices;  // alternating, device first, ends at the app
  int order = 0;                // occurrence rank of the app in the walk
  std::size_t hits = 0;         // times this exact path was sampled
};

// Samples up to `walk_budget` walks from `device` and keeps those that reach
// `app` within `max_order` occurrences, aggregated by path with hit counts
// (descending). The evidence trace behind a prediction; empty when the pair
// is unreachable within the budget.
std::vector<WalkTrace> explain_prediction(const BipartiteGraph& graph, Index device, Index app,
                                          std::size_t walk_budget, int max_order,
                                          std::uint64_t seed,
                                          WalkKernel kernel = WalkKernel::DegreeWeighted);

}  // namespace phagraph
