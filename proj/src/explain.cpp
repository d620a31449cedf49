#include "phagraph/explain.hpp"

#include <algorithm>
#include <map>

namespace phagraph {

std::vector<WalkTrace> explain_prediction(const BipartiteGraph& graph, Index device, Index app,
                                          std::size_t walk_budget, int max_order,
                                          std::uint64_t seed, WalkKernel kernel) {
  if (device >= graph.n_devices()) throw ValidationError("explain: device index out of range");
  if (app >= graph.n_apps()) throw ValidationError("explain: app index out of range");
  if (max_order < 1) throw ValidationError("explain: max_order must be >= 1");

  const WalkSampler sampler(graph, kernel);
  const std::size_t walk_edges = 2 * static_cast<std::size_t>(max_order) - 1;
  Rng rng(derive_seed(seed, 0x657870));

  std::map<std::vector<Index>, std::pair<int, std::size_t>> traces;  // path -> (order, hits)
  for (std::size_t w = 0; w < walk_budget; ++w) {
    const Walk walk = sample_walk(sampler, device, walk_edges, rng);
    for (int order = 1; order <= max_order; ++order) {
      const std::size_t pos = 2 * static_cast<std::size_t>(order) - 1;
      if (pos >= walk.vertices.size()) break;
      if (walk.vertices[pos] != app) continue;
      std::vector<Index> path(walk.vertices.begin(), walk.vertices.begin() + pos + 1);
      auto [it, fresh] = traces.try_emplace(std::move(path), std::make_pair(order, 0u));
      ++it->second.second;
      break;  // first hit per walk
    }
  }

  std::vector<WalkTrace> out;
  out.reserve(traces.size());
  for (auto& [path, info] : traces) out.push_back({path, info.first, info.second});
  std::sort(out.begin(), out.end(), [](const WalkTrace& a, const WalkTrace& b) {
    if (a.hits != b.hits) return a.hits > b.hits;
    return a.vertices < b.vertices;
  });
  return out;
}

}  // namespace phagraph
