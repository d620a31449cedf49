#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/graph.hpp"

namespace phagraph {

enum class Side { Device, App };

struct DegreeHistogram {
  std::map<Index, std::size_t> counts;  // degree -> vertex count
  double alpha = 0.0;                   // power-law exponent, p(x) ~ x^-alpha on the tail
  Index x_min = 0;                      // tail cutoff minimizing the KS distance
  double ks_distance = 0.0;
  bool reliable = false;                // false when fewer than 10 distinct degrees
};

// Histogram over observed degrees plus a maximum-likelihood power-law tail
// fit, with x_min chosen by minimal Kolmogorov-Smirnov distance.
DegreeHistogram degree_histogram(const BipartiteGraph& graph, Side side);

// MLE fit on a raw degree sample (exposed for reuse by the generator tests).
struct PowerLawFit {
  double alpha = 0.0;
  Index x_min = 0;
  double ks_distance = 0.0;
  bool reliable = false;
};
PowerLawFit fit_power_law(const std::vector<Index>& degrees);

// Pearson correlation between an app's degree and the mean degree of the
// distinct apps reachable from it by walks of exactly `hops` steps (the
// start vertex itself is excluded). Start vertices are sampled without
// replacement; each sampled neighborhood is expanded exactly.
double khop_degree_correlation(const BipartiteGraph& graph, int hops, std::size_t sample_size,
                               std::uint64_t seed);

}  // namespace phagraph
