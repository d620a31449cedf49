#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/events.hpp"

namespace phagraph {

// Mixed-membership block model with degree propensities: app popularity is
// drawn from a truncated power law, device activity from a log-normal, and
// each vertex carries a latent interest group. Pairs sharing a group are
// boosted by `affinity`; `mixing` controls how strongly cross-group pairs
// are suppressed. affinity = 1 degenerates to a pure popularity model.
struct GeneratorConfig {
  Index n_devices = 1000;
  Index n_apps = 100;
  std::size_t target_edges = 5000;
  double app_exponent = 2.3;  // p(k) ~ k^-exponent
  Index n_groups = 10;
  double affinity = 4.0;
  double mixing = 0.7;  // in (0, 1]
  double device_log_mean = 0.0;
  double device_log_sigma = 0.75;
  std::int64_t t_start = 0;
  std::int64_t t_end = 86400;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GtEdge {
  Index device;
  Index app;
  std::int64_t timestamp;
};

struct GroundTruth {
  GeneratorConfig config;
  std::vector<Index> device_group;
  std::vector<Index> app_group;
  std::vector<double> device_propensity;
  std::vector<double> app_propensity;  // scaled so the sum matches target_edges
  std::vector<GtEdge> visible_edges;   // canonical (device, app) order
  double weight_norm = 0.0;            // sum of planted weights over all pairs

  // Pair-level affinity multiplier from the latent groups.
  double group_weight(Index d, Index m) const;
  // Unnormalized planted sampling weight of a pair.
  double planted_weight(Index d, Index m) const;
  // Normalized single-draw probability; backed by the retained matrix when
  // the candidate-pair count is at most 10^6, recomputed otherwise.
  double pair_prob(Index d, Index m) const;

  bool has_visible_edge(Index d, Index m) const;

  std::vector<double> pair_probs;  // row-major n_devices x n_apps, may be empty

  static std::string device_token(Index d);
  static std::string app_token(Index m);
};

struct SyntheticData {
  std::vector<InstallEvent> events;  // sorted by (timestamp, device, app)
  GroundTruth truth;
};

// Deterministic for a fixed config (seed included).
SyntheticData generate(const GeneratorConfig& config);

struct HoldoutResult {
  std::vector<InstallEvent> visible;
  std::vector<InstallEvent> future;  // re-draws on pairs absent from visible,
                                     // timestamped after the visible window
};

HoldoutResult holdout_future_edges(const GroundTruth& truth, double fraction, std::uint64_t seed);

void write_ground_truth(const std::string& path, const GroundTruth& truth);

}  // namespace phagraph
