#include "phagraph/walk.hpp"

#include <numeric>

namespace phagraph {

WalkKernel parse_walk_kernel(const std::string& name) {
  if (name == "degree_weighted") return WalkKernel::DegreeWeighted;
  if (name == "uniform") return WalkKernel::Uniform;
  throw ValidationError("unknown walk kernel '" + name + "' (expected degree_weighted or uniform)");
}

WalkSampler::FlatAlias WalkSampler::build_side(const BipartiteGraph& graph, Side side,
                                               WalkKernel kernel) {
  FlatAlias table;
  table.prob.resize(graph.n_edges(), 1.0);
  table.alias.resize(graph.n_edges(), 0);
  if (kernel == WalkKernel::Uniform) return table;  // unused; sampling falls back to uniform

  const Index n = side == Side::Device ? graph.n_devices() : graph.n_apps();
  std::vector<double> scaled;
  std::vector<Index> small, large;
  std::size_t base = 0;
  for (Index v = 0; v < n; ++v) {
    auto nbrs = side == Side::Device ? graph.device_neighbors(v) : graph.app_neighbors(v);
    const std::size_t deg = nbrs.size();
    scaled.assign(deg, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < deg; ++i) {
      const double w = side == Side::Device ? graph.app_degree(nbrs[i])
                                            : graph.device_degree(nbrs[i]);
      scaled[i] = w;
      total += w;
    }
    small.clear();
    large.clear();
    for (std::size_t i = 0; i < deg; ++i) {
      scaled[i] *= static_cast<double>(deg) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<Index>(i));
    }
    while (!small.empty() && !large.empty()) {
      const Index s = small.back();
      const Index l = large.back();
      small.pop_back();
      large.pop_back();
      table.prob[base + s] = scaled[s];
      table.alias[base + s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (Index i : large) table.prob[base + i] = 1.0;
    for (Index i : small) table.prob[base + i] = 1.0;
    base += deg;
  }
  return table;
}

WalkSampler::WalkSampler(const BipartiteGraph& graph, WalkKernel kernel)
    : graph_(graph),
      kernel_(kernel),
      device_side_(build_side(graph, Side::Device, kernel)),
      app_side_(build_side(graph, Side::App, kernel)) {}

Index WalkSampler::step_from_device(Index device, Rng& rng) const {
  auto nbrs = graph_.device_neighbors(device);
  if (nbrs.empty()) throw ComputeError("walk reached a degree-0 device");
  std::size_t local = static_cast<std::size_t>(rng.next_below(nbrs.size()));
  if (kernel_ == WalkKernel::DegreeWeighted) {
    const std::size_t base = graph_.device_offset(device);
    if (rng.next_double() >= device_side_.prob[base + local])
      local = device_side_.alias[base + local];
  }
  return nbrs[local];
}

Index WalkSampler::step_from_app(Index app, Rng& rng) const {
  auto nbrs = graph_.app_neighbors(app);
  if (nbrs.empty()) throw ComputeError("walk reached a degree-0 app");
  std::size_t local = static_cast<std::size_t>(rng.next_below(nbrs.size()));
  if (kernel_ == WalkKernel::DegreeWeighted) {
    const std::size_t base = graph_.app_offset(app);
    if (rng.next_double() >= app_side_.prob[base + local])
      local = app_side_.alias[base + local];
  }
  return nbrs[local];
}

Walk sample_walk(const WalkSampler& sampler, Index start, std::size_t length_edges, Rng& rng) {
  if (start >= sampler.graph().n_devices())
    throw ValidationError("walk start device index out of range");
  Walk walk;
  walk.vertices.reserve(length_edges + 1);
  walk.vertices.push_back(start);
  Index current = start;
  for (std::size_t step = 0; step < length_edges; ++step) {
    current = (step % 2 == 0) ? sampler.step_from_device(current, rng)
                              : sampler.step_from_app(current, rng);
    walk.vertices.push_back(current);
  }
  return walk;
}

namespace {

// One kernel application: mass moves from `cur` (over `from` side) to the
// opposite side, each vertex distributing to neighbors by the kernel weights.
Vec apply_kernel(const BipartiteGraph& graph, Side from, const Vec& cur, WalkKernel kernel) {
  const Index n_to = from == Side::Device ? graph.n_apps() : graph.n_devices();
  Vec next = Vec::Zero(n_to);
  const Index n_from = from == Side::Device ? graph.n_devices() : graph.n_apps();
  for (Index v = 0; v < n_from; ++v) {
    const double mass = cur[v];
    if (mass == 0.0) continue;
    auto nbrs = from == Side::Device ? graph.device_neighbors(v) : graph.app_neighbors(v);
    if (nbrs.empty()) continue;
    if (kernel == WalkKernel::Uniform) {
      const double share = mass / static_cast<double>(nbrs.size());
      for (Index u : nbrs) next[u] += share;
    } else {
      double total = 0.0;
      for (Index u : nbrs)
        total += from == Side::Device ? graph.app_degree(u) : graph.device_degree(u);
      for (Index u : nbrs) {
        const double w = from == Side::Device ? graph.app_degree(u) : graph.device_degree(u);
        next[u] += mass * w / total;
      }
    }
  }
  return next;
}

}  // namespace

Vec exact_lorder_distribution(const BipartiteGraph& graph, Side start_side, Index v, int order,
                              WalkKernel kernel) {
  if (graph.n_vertices() > 5000)
    throw ValidationError("exact order distribution is guarded to 5000 vertices; "
                          "use Monte Carlo walk estimation instead");
  if (order < 1) throw ValidationError("order must be >= 1");
  const Index n_start = start_side == Side::Device ? graph.n_devices() : graph.n_apps();
  if (v >= n_start) throw ValidationError("vertex index out of range");

  Vec cur = Vec::Zero(n_start);
  cur[v] = 1.0;
  Side side = start_side;
  for (int step = 0; step < 2 * order - 1; ++step) {
    cur = apply_kernel(graph, side, cur, kernel);
    side = side == Side::Device ? Side::App : Side::Device;
  }
  return cur;
}

void extract_pairs_into(const Walk& walk, int max_order, std::vector<ProximityPair>& out) {
  out.clear();
  if (walk.vertices.empty()) return;
  const Index device = walk.vertices.front();
  for (int order = 1; order <= max_order; ++order) {
    const std::size_t pos = 2 * static_cast<std::size_t>(order) - 1;
    if (pos >= walk.vertices.size()) break;
    out.push_back({device, walk.vertices[pos], order, 1.0 / order});
  }
}

std::vector<ProximityPair> extract_pairs(const Walk& walk, int max_order) {
  std::vector<ProximityPair> out;
  extract_pairs_into(walk, max_order, out);
  return out;
}

}  // namespace phagraph
