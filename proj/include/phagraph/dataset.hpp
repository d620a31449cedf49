#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/features.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/trainer.hpp"

namespace phagraph {

// Policy for test edges whose device or app was never seen in training.
enum class ColdPolicy { Drop, ZeroVector };

ColdPolicy parse_cold_policy(const std::string& name);
std::string cold_policy_name(ColdPolicy p);

struct LabeledEdge {
  Index device;  // train-graph index; sentinel n_devices/n_apps when cold
  Index app;
  bool positive;
  bool cold = false;
};

struct LabeledEdgeSet {
  std::vector<LabeledEdge> entries;
  Mat features;  // one row per entry
  Combiner combiner = Combiner::Concat;
  std::uint64_t embedding_graph_hash = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t cold_dropped = 0;  // test positives removed under ColdPolicy::Drop
};

using EdgeKeySet = std::unordered_set<std::uint64_t>;

std::uint64_t edge_key(Index device, Index app);

// Uniform draws over non-edges: device and app sampled uniformly, rejected
// against the graph's edges and `exclusion`. Output pairs are distinct.
std::vector<std::pair<Index, Index>> sample_negative_edges(const BipartiteGraph& graph,
                                                           std::size_t count,
                                                           const EdgeKeySet& exclusion,
                                                           std::uint64_t seed);

// Balanced train/test feature sets. Train positives are the train graph's
// edges; test positives come from the split (cold ones handled per policy).
// Negatives for either set exclude train and test positives and each other.
// The embedding must have been trained on `graph_train` (checked by hash).
struct DatasetPair {
  LabeledEdgeSet train;
  LabeledEdgeSet test;
};

DatasetPair build_datasets(const Embedding& phi, const TemporalSplit& split,
                           const BipartiteGraph& graph_train, Combiner combiner,
                           ColdPolicy cold_policy, std::uint64_t seed);

// Lower-level assembly used by the experiment harness, where the candidate
// lists are shared across methods: featurizes explicit positive/negative
// index pairs against `phi`.
LabeledEdgeSet assemble_labeled_set(const Embedding& phi,
                                    const std::vector<std::pair<Index, Index>>& positives,
                                    const std::vector<std::pair<Index, Index>>& negatives,
                                    Combiner combiner);

}  // namespace phagraph
