#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "phagraph/common.hpp"
#include "phagraph/events.hpp"

namespace phagraph {

// Deduplicated device-app adjacency over a time window, CSR in both
// directions. Immutable after construction and safe to share across threads.
class BipartiteGraph {
 public:
  struct Edge {
    Index device;
    Index app;
    std::int64_t timestamp;  // earliest event time for the pair
  };

  // Builds the graph from events with timestamp in [t_a, t_b]. Repeated
  // (device, app) pairs collapse to one edge keeping the earliest timestamp.
  // Vertex indices are assigned in first-appearance order of the filtered
  // stream, so builds are deterministic for a fixed input.
  static BipartiteGraph build(const std::vector<InstallEvent>& events, std::int64_t t_a,
                              std::int64_t t_b);

  // Reassembles a graph from snapshot parts, trusting the stored indices.
  // Edge timestamps are not part of a snapshot and default to the window
  // start.
  static BipartiteGraph from_parts(std::vector<std::string> device_tokens,
                                   std::vector<std::string> app_tokens,
                                   std::vector<std::pair<Index, Index>> edge_pairs,
                                   std::int64_t t_a, std::int64_t t_b);

  Index n_devices() const { return static_cast<Index>(device_tokens_.size()); }
  Index n_apps() const { return static_cast<Index>(app_tokens_.size()); }
  Index n_vertices() const { return n_devices() + n_apps(); }
  std::size_t n_edges() const { return edges_.size(); }

  std::span<const Index> device_neighbors(Index d) const {
    return {device_adj_.data() + device_offsets_[d],
            device_adj_.data() + device_offsets_[d + 1]};
  }
  std::span<const Index> app_neighbors(Index m) const {
    return {app_adj_.data() + app_offsets_[m], app_adj_.data() + app_offsets_[m + 1]};
  }

  Index device_degree(Index d) const {
    return static_cast<Index>(device_offsets_[d + 1] - device_offsets_[d]);
  }
  Index app_degree(Index m) const {
    return static_cast<Index>(app_offsets_[m + 1] - app_offsets_[m]);
  }

  std::size_t device_offset(Index d) const { return device_offsets_[d]; }
  std::size_t app_offset(Index m) const { return app_offsets_[m]; }

  const std::string& device_token(Index d) const { return device_tokens_[d]; }
  const std::string& app_token(Index m) const { return app_tokens_[m]; }

  // Returns n_devices() / n_apps() when the token is unknown.
  Index find_device(const std::string& token) const;
  Index find_app(const std::string& token) const;

  bool has_edge(Index d, Index m) const;

  const std::vector<Edge>& edges() const { return edges_; }
  std::int64_t window_start() const { return window_start_; }
  std::int64_t window_end() const { return window_end_; }

  // Stable content hash over tokens, edges and window (FNV-1a).
  std::uint64_t content_hash() const;

 private:
  std::vector<std::string> device_tokens_;
  std::vector<std::string> app_tokens_;
  std::unordered_map<std::string, Index> device_index_;
  std::unordered_map<std::string, Index> app_index_;

  std::vector<std::size_t> device_offsets_;  // size n_devices + 1
  std::vector<Index> device_adj_;            // app indices
  std::vector<std::size_t> app_offsets_;     // size n_apps + 1
  std::vector<Index> app_adj_;               // device indices

  std::vector<Edge> edges_;  // device-major canonical order
  std::int64_t window_start_ = 0;
  std::int64_t window_end_ = 0;
};

// Convenience: window spanning all events.
BipartiteGraph build_graph(const std::vector<InstallEvent>& events);

// A deduplicated (device, app) pair with its earliest observed timestamp.
struct SplitEdge {
  std::string device_id;
  std::string app_id;
  std::int64_t timestamp;
  bool cold_device = false;  // device never seen in the train window
  bool cold_app = false;

  bool cold() const { return cold_device || cold_app; }
};

struct TemporalSplit {
  std::vector<SplitEdge> train_edges;  // earliest timestamp <= boundary
  std::vector<SplitEdge> test_edges;   // earliest timestamp in (boundary, boundary+horizon]
  std::int64_t boundary = 0;
  std::int64_t horizon = 0;
  std::size_t cold_test_edges = 0;
};

// Splits events at `boundary`: pairs first observed at or before the boundary
// form the train edge set, pairs first observed strictly after it (within the
// horizon) form the test positives. A pair observed on both sides belongs to
// train only, which keeps test disjoint from train. Test edges touching a
// device or app absent from training are retained and flagged cold.
TemporalSplit temporal_split(const std::vector<InstallEvent>& events, std::int64_t boundary,
                             std::int64_t horizon);

std::vector<InstallEvent> split_edges_to_events(const std::vector<SplitEdge>& edges);

}  // namespace phagraph
