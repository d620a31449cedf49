#pragma once

#include <cstdint>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/trainer.hpp"

namespace phagraph {

// Normalized preferential attachment: deg(d) * deg(m) / (2 |E|).
double pa_score(const BipartiteGraph& graph, Index device, Index app);

std::vector<double> pa_scores(const BipartiteGraph& graph,
                              const std::vector<std::pair<Index, Index>>& pairs);

// Shared knobs for the edge-sampling proximity baselines.
struct BaselineConfig {
  int dim = 128;
  int neg_samples = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  int epochs = 5;  // each epoch draws |E| edges and processes both directions
  int workers = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// First-order proximity: observed edges are pulled together under a logistic
// loss against uniform negatives, one shared vector per vertex.
Embedding train_first_order(const BipartiteGraph& graph, const BaselineConfig& config);

// Second-order proximity: separate context vectors per vertex; a vertex's
// target vector is trained against its neighbors' contexts, so vertices with
// similar neighborhoods converge. Scoring uses the target vectors.
Embedding train_second_order(const BipartiteGraph& graph, const BaselineConfig& config);

}  // namespace phagraph
