#include "phagraph/graph.hpp"

#include <algorithm>

#include "phagraph/hash.hpp"

namespace phagraph {

BipartiteGraph BipartiteGraph::build(const std::vector<InstallEvent>& events, std::int64_t t_a,
                                     std::int64_t t_b) {
  if (t_a > t_b) throw ValidationError("graph window start exceeds window end");

  BipartiteGraph g;
  g.window_start_ = t_a;
  g.window_end_ = t_b;

  std::unordered_map<std::uint64_t, std::size_t> edge_slot;
  for (const auto& ev : events) {
    if (ev.timestamp < t_a || ev.timestamp > t_b) continue;
    if (ev.device_id.empty() || ev.app_id.empty())
      throw ValidationError("event with empty device or app token");

    auto [dit, d_new] = g.device_index_.try_emplace(ev.device_id, g.n_devices());
    if (d_new) g.device_tokens_.push_back(ev.device_id);
    auto [ait, a_new] = g.app_index_.try_emplace(ev.app_id, g.n_apps());
    if (a_new) g.app_tokens_.push_back(ev.app_id);

    const Index d = dit->second;
    const Index m = ait->second;
    const std::uint64_t key = (static_cast<std::uint64_t>(d) << 32) | m;
    auto [eit, e_new] = edge_slot.try_emplace(key, g.edges_.size());
    if (e_new) {
      g.edges_.push_back({d, m, ev.timestamp});
    } else {
      auto& edge = g.edges_[eit->second];
      edge.timestamp = std::min(edge.timestamp, ev.timestamp);
    }
  }

  if (g.edges_.empty())
    throw ValidationError("no events fall inside the graph window; at least one edge is required");

  // The two token namespaces must be disjoint.
  for (const auto& token : g.app_tokens_) {
    if (g.device_index_.count(token))
      throw ValidationError("token '" + token + "' appears as both a device and an app");
  }

  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return a.device != b.device ? a.device < b.device : a.app < b.app;
  });

  g.device_offsets_.assign(g.n_devices() + 1, 0);
  g.app_offsets_.assign(g.n_apps() + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.device_offsets_[e.device + 1];
    ++g.app_offsets_[e.app + 1];
  }
  for (std::size_t i = 1; i < g.device_offsets_.size(); ++i)
    g.device_offsets_[i] += g.device_offsets_[i - 1];
  for (std::size_t i = 1; i < g.app_offsets_.size(); ++i)
    g.app_offsets_[i] += g.app_offsets_[i - 1];

  g.device_adj_.resize(g.edges_.size());
  g.app_adj_.resize(g.edges_.size());
  std::vector<std::size_t> dpos(g.device_offsets_.begin(), g.device_offsets_.end() - 1);
  std::vector<std::size_t> apos(g.app_offsets_.begin(), g.app_offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.device_adj_[dpos[e.device]++] = e.app;
    g.app_adj_[apos[e.app]++] = e.device;
  }
  return g;
}

BipartiteGraph BipartiteGraph::from_parts(std::vector<std::string> device_tokens,
                                          std::vector<std::string> app_tokens,
                                          std::vector<std::pair<Index, Index>> edge_pairs,
                                          std::int64_t t_a, std::int64_t t_b) {
  if (t_a > t_b) throw ValidationError("graph window start exceeds window end");
  if (edge_pairs.empty()) throw ValidationError("graph requires at least one edge");

  BipartiteGraph g;
  g.window_start_ = t_a;
  g.window_end_ = t_b;
  g.device_tokens_ = std::move(device_tokens);
  g.app_tokens_ = std::move(app_tokens);
  for (Index d = 0; d < g.n_devices(); ++d) {
    if (!g.device_index_.try_emplace(g.device_tokens_[d], d).second)
      throw ValidationError("duplicate device token '" + g.device_tokens_[d] + "'");
  }
  for (Index m = 0; m < g.n_apps(); ++m) {
    if (!g.app_index_.try_emplace(g.app_tokens_[m], m).second)
      throw ValidationError("duplicate app token '" + g.app_tokens_[m] + "'");
    if (g.device_index_.count(g.app_tokens_[m]))
      throw ValidationError("token '" + g.app_tokens_[m] + "' appears as both a device and an app");
  }

  std::sort(edge_pairs.begin(), edge_pairs.end());
  for (std::size_t i = 0; i < edge_pairs.size(); ++i) {
    const auto& [d, m] = edge_pairs[i];
    if (d >= g.n_devices() || m >= g.n_apps())
      throw ValidationError("edge references an out-of-range vertex index");
    if (i > 0 && edge_pairs[i] == edge_pairs[i - 1])
      throw ValidationError("duplicate edge in snapshot");
    g.edges_.push_back({d, m, t_a});
  }

  g.device_offsets_.assign(g.n_devices() + 1, 0);
  g.app_offsets_.assign(g.n_apps() + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.device_offsets_[e.device + 1];
    ++g.app_offsets_[e.app + 1];
  }
  for (std::size_t i = 1; i < g.device_offsets_.size(); ++i)
    g.device_offsets_[i] += g.device_offsets_[i - 1];
  for (std::size_t i = 1; i < g.app_offsets_.size(); ++i)
    g.app_offsets_[i] += g.app_offsets_[i - 1];

  g.device_adj_.resize(g.edges_.size());
  g.app_adj_.resize(g.edges_.size());
  std::vector<std::size_t> dpos(g.device_offsets_.begin(), g.device_offsets_.end() - 1);
  std::vector<std::size_t> apos(g.app_offsets_.begin(), g.app_offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.device_adj_[dpos[e.device]++] = e.app;
    g.app_adj_[apos[e.app]++] = e.device;
  }

  for (Index d = 0; d < g.n_devices(); ++d)
    if (g.device_degree(d) == 0)
      throw ValidationError("snapshot contains an isolated device: " + g.device_tokens_[d]);
  for (Index m = 0; m < g.n_apps(); ++m)
    if (g.app_degree(m) == 0)
      throw ValidationError("snapshot contains an isolated app: " + g.app_tokens_[m]);
  return g;
}

Index BipartiteGraph::find_device(const std::string& token) const {
  auto it = device_index_.find(token);
  return it == device_index_.end() ? n_devices() : it->second;
}

Index BipartiteGraph::find_app(const std::string& token) const {
  auto it = app_index_.find(token);
  return it == app_index_.end() ? n_apps() : it->second;
}

bool BipartiteGraph::has_edge(Index d, Index m) const {
  auto nbrs = device_neighbors(d);
  return std::binary_search(nbrs.begin(), nbrs.end(), m);
}

// Structural hash: tokens, adjacency and window. Edge timestamps are
// bookkeeping and deliberately excluded so a snapshot round trip preserves
// the hash that training metadata records.
std::uint64_t BipartiteGraph::content_hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(n_devices()));
  h.add(static_cast<std::uint64_t>(n_apps()));
  for (const auto& t : device_tokens_) h.add(t);
  for (const auto& t : app_tokens_) h.add(t);
  for (const auto& e : edges_) {
    h.add(static_cast<std::uint64_t>(e.device));
    h.add(static_cast<std::uint64_t>(e.app));
  }
  h.add(static_cast<std::uint64_t>(window_start_));
  h.add(static_cast<std::uint64_t>(window_end_));
  return h.value();
}

BipartiteGraph build_graph(const std::vector<InstallEvent>& events) {
  std::int64_t lo = 0, hi = 0;
  bool first = true;
  for (const auto& ev : events) {
    if (first) {
      lo = hi = ev.timestamp;
      first = false;
    } else {
      lo = std::min(lo, ev.timestamp);
      hi = std::max(hi, ev.timestamp);
    }
  }
  return BipartiteGraph::build(events, lo, hi);
}

TemporalSplit temporal_split(const std::vector<InstallEvent>& events, std::int64_t boundary,
                             std::int64_t horizon) {
  if (horizon <= 0) throw ValidationError("split horizon must be positive");

  // Earliest timestamp per pair, preserving first-appearance order.
  struct PairInfo {
    std::int64_t earliest;
    std::size_t order;
  };
  std::unordered_map<std::string, PairInfo> earliest;
  std::vector<const InstallEvent*> representative;
  for (const auto& ev : events) {
    if (ev.timestamp > boundary + horizon) continue;
    std::string key = ev.device_id + '\x1f' + ev.app_id;
    auto [it, fresh] = earliest.try_emplace(key, PairInfo{ev.timestamp, representative.size()});
    if (fresh) {
      representative.push_back(&ev);
    } else if (ev.timestamp < it->second.earliest) {
      it->second.earliest = ev.timestamp;
    }
  }

  TemporalSplit split;
  split.boundary = boundary;
  split.horizon = horizon;

  std::vector<std::pair<const InstallEvent*, std::int64_t>> test_candidates;
  for (const auto& [key, info] : earliest) {
    const InstallEvent& ev = *representative[info.order];
    if (info.earliest <= boundary) {
      split.train_edges.push_back({ev.device_id, ev.app_id, info.earliest});
    } else {
      test_candidates.emplace_back(&ev, info.earliest);
    }
  }

  auto by_order = [](const SplitEdge& a, const SplitEdge& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp
                                      : (a.device_id != b.device_id ? a.device_id < b.device_id
                                                                    : a.app_id < b.app_id);
  };
  std::sort(split.train_edges.begin(), split.train_edges.end(), by_order);

  if (split.train_edges.empty()) throw ValidationError("temporal split has an empty train side");
  if (test_candidates.empty()) throw ValidationError("temporal split has an empty test side");

  std::unordered_map<std::string, bool> train_devices, train_apps;
  for (const auto& e : split.train_edges) {
    train_devices[e.device_id] = true;
    train_apps[e.app_id] = true;
  }
  for (const auto& [evp, ts] : test_candidates) {
    SplitEdge e{evp->device_id, evp->app_id, ts};
    e.cold_device = !train_devices.count(e.device_id);
    e.cold_app = !train_apps.count(e.app_id);
    if (e.cold()) ++split.cold_test_edges;
    split.test_edges.push_back(std::move(e));
  }
  std::sort(split.test_edges.begin(), split.test_edges.end(), by_order);
  return split;
}

std::vector<InstallEvent> split_edges_to_events(const std::vector<SplitEdge>& edges) {
  std::vector<InstallEvent> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back({e.device_id, e.app_id, e.timestamp});
  return out;
}

}  // namespace phagraph
