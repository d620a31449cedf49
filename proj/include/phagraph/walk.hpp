#pragma once

#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/rng.hpp"
#include "phagraph/stats.hpp"

namespace phagraph {

// One-step transition kernel. DegreeWeighted moves from v to neighbor u with
// probability deg(u) / sum over neighbors u' of deg(u'); Uniform picks a
// neighbor uniformly and exists for ablation runs.
enum class WalkKernel { DegreeWeighted, Uniform };

WalkKernel parse_walk_kernel(const std::string& name);

// Alternating device/app vertex sequence starting at a device. Even positions
// hold device indices, odd positions app indices.
struct Walk {
  std::vector<Index> vertices;

  Index start_device() const { return vertices.front(); }
  std::size_t length_edges() const { return vertices.size() - 1; }
};

// Precomputed per-vertex alias samplers over CSR neighbor lists; O(1) per
// step. Immutable after construction, safe to share across walk workers.
class WalkSampler {
 public:
  WalkSampler(const BipartiteGraph& graph, WalkKernel kernel);

  Index step_from_device(Index device, Rng& rng) const;
  Index step_from_app(Index app, Rng& rng) const;

  const BipartiteGraph& graph() const { return graph_; }
  WalkKernel kernel() const { return kernel_; }

 private:
  struct FlatAlias {
    std::vector<double> prob;
    std::vector<Index> alias;  // local slot within the vertex's segment
  };

  static FlatAlias build_side(const BipartiteGraph& graph, Side side, WalkKernel kernel);

  const BipartiteGraph& graph_;
  WalkKernel kernel_;
  FlatAlias device_side_;  // segments aligned with device_neighbors
  FlatAlias app_side_;
};

// Samples a walk of `length_edges` steps starting at `start`. Walks never
// terminate early: every vertex has degree >= 1 by graph invariant.
Walk sample_walk(const WalkSampler& sampler, Index start, std::size_t length_edges, Rng& rng);

// Exact order-l occurrence distribution: the probability that the l-th
// opposite-side vertex of a walk from v equals each candidate, computed by
// composing the one-step kernel 2l-1 times. Sums to 1 whenever any l-path
// exists. Guarded to graphs of at most 5000 vertices; larger graphs should
// use Monte Carlo estimation over sampled walks.
Vec exact_lorder_distribution(const BipartiteGraph& graph, Side start_side, Index v, int order,
                              WalkKernel kernel = WalkKernel::DegreeWeighted);

// A positive training pair harvested from a walk.
struct ProximityPair {
  Index device;
  Index app;
  int order;      // occurrence rank of the app in the walk
  double weight;  // decay 1/order
};

// For the walk's start device, emits every app occurrence up to rank
// max_order with decay weight 1/rank.
std::vector<ProximityPair> extract_pairs(const Walk& walk, int max_order);
void extract_pairs_into(const Walk& walk, int max_order, std::vector<ProximityPair>& out);

}  // namespace phagraph
