#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/walk.hpp"

namespace phagraph {

// Vertex embeddings, devices first then apps, one row per vertex.
struct Embedding {
  Mat vectors;
  Index n_devices = 0;
  std::uint64_t graph_hash = 0;

  int dim() const { return static_cast<int>(vectors.cols()); }
  Index n_apps() const { return static_cast<Index>(vectors.rows()) - n_devices; }

  Scalar* device_row(Index d) { return vectors.row(d).data(); }
  const Scalar* device_row(Index d) const { return vectors.row(d).data(); }
  Scalar* app_row(Index m) { return vectors.row(n_devices + m).data(); }
  const Scalar* app_row(Index m) const { return vectors.row(n_devices + m).data(); }

  Eigen::Map<const RowVec> device_vec(Index d) const {
    return {device_row(d), static_cast<Eigen::Index>(dim())};
  }
  Eigen::Map<const RowVec> app_vec(Index m) const {
    return {app_row(m), static_cast<Eigen::Index>(dim())};
  }
};

struct TrainerConfig {
  int dim = 128;
  int max_order = 4;       // highest proximity rank harvested from a walk
  int walk_length = 6;     // edges per walk by default
  bool walk_length_in_vertices = false;
  int walks_per_vertex = 40;
  int neg_samples = 50;
  double margin_epsilon = 1.0;
  int margin_k = 0;        // 0 -> neg_samples
  double reg_lambda = 1e-4;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  int epochs = 1;
  int workers = 1;
  WalkKernel kernel = WalkKernel::DegreeWeighted;
  std::uint64_t seed = 1;
  // Entries start uniform in [-init_half_range, init_half_range], or in
  // [0, 2*init_half_range) when init_nonnegative. The default width keeps
  // initial score gaps well above the margin gate so the ranking term is
  // live from the first step; the gate never activates when initial dot
  // products sit far below margin_threshold().
  double init_half_range = 0.5;
  bool init_nonnegative = true;
  // Averages the per-epoch snapshots from the second half of training, which
  // damps the heavy-tailed update noise the gated 1/delta gradient injects.
  // Requires epochs >= 2 to have any effect.
  bool tail_average = true;

  int effective_margin_k() const { return margin_k > 0 ? margin_k : neg_samples; }
  double margin_threshold() const { return margin_epsilon / effective_margin_k(); }
  std::size_t walk_edges() const {
    return walk_length_in_vertices ? static_cast<std::size_t>(walk_length - 1)
                                   : static_cast<std::size_t>(walk_length);
  }
  // Every walk yields this many (device, app) pairs on a degree>=1 graph.
  int pairs_per_walk() const;

  // Throws ValidationError on hard errors; returns soft warnings (e.g. when
  // walks are too short to ever reach max_order).
  std::vector<std::string> validate() const;
};

// Gradient of the margin-gated ranking term weight * log(delta) with
// delta = phi_d . phi_neg - phi_d . phi_pos, exposed for the
// finite-difference oracle. Inactive (delta <= threshold) means zero
// gradient and zero loss.
struct RankingGradient {
  Vec wrt_device;
  Vec wrt_positive;
  Vec wrt_negative;
  double loss = 0.0;
  bool active = false;
};

RankingGradient ranking_gradient(Eigen::Ref<const RowVec> device, Eigen::Ref<const RowVec> positive,
                                 Eigen::Ref<const RowVec> negative, double weight,
                                 double threshold);

// One SGD step for a walk pair against a batch of uniform negatives: applies
// the ranking gradient wherever the margin indicator is active and an L2
// decay on every touched row. Only rows d, m and the drawn negatives change.
// Returns the summed ranking loss.
double ranking_step(Embedding& phi, const ProximityPair& pair, std::span<const Index> negatives,
                    const TrainerConfig& config, double learning_rate);

// Decay-weighted ranking objective over walk-sampled proximity pairs,
// minimized by asynchronous SGD. workers=1 is bit-reproducible for a fixed
// seed; workers>1 runs lock-free over shared rows and is statistically
// equivalent.
Embedding train_embedding(const BipartiteGraph& graph, const TrainerConfig& config);

}  // namespace phagraph
