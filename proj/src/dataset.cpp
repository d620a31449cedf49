#include "phagraph/dataset.hpp"

#include <algorithm>

#include "phagraph/rng.hpp"

namespace phagraph {

ColdPolicy parse_cold_policy(const std::string& name) {
  if (name == "drop") return ColdPolicy::Drop;
  if (name == "zero_vector") return ColdPolicy::ZeroVector;
  throw ValidationError("unknown cold policy '" + name + "' (expected drop or zero_vector)");
}

std::string cold_policy_name(ColdPolicy p) {
  return p == ColdPolicy::Drop ? "drop" : "zero_vector";
}

RowVec featurize_edge(const Embedding& phi, Index device, Index app, Combiner c) {
  return combine_vectors(phi.device_vec(device), phi.app_vec(app), c);
}

std::uint64_t edge_key(Index device, Index app) {
  return (static_cast<std::uint64_t>(device) << 32) | app;
}

std::vector<std::pair<Index, Index>> sample_negative_edges(const BipartiteGraph& graph,
                                                           std::size_t count,
                                                           const EdgeKeySet& exclusion,
                                                           std::uint64_t seed) {
  const std::uint64_t n_dev = graph.n_devices();
  const std::uint64_t n_apps = graph.n_apps();

  EdgeKeySet blocked;
  blocked.reserve(graph.n_edges() + exclusion.size() + count);
  for (const auto& e : graph.edges()) blocked.insert(edge_key(e.device, e.app));
  blocked.insert(exclusion.begin(), exclusion.end());

  const double capacity = static_cast<double>(n_dev) * static_cast<double>(n_apps);
  const double available = capacity - static_cast<double>(blocked.size());
  if (static_cast<double>(count) > available)
    throw ValidationError("cannot sample " + std::to_string(count) +
                          " negative edges: only " + std::to_string(static_cast<long long>(available)) +
                          " non-edges exist");

  std::vector<std::pair<Index, Index>> out;
  out.reserve(count);
  Rng rng(derive_seed(seed, 0x6e6567));

  if (static_cast<double>(count) > 0.5 * available) {
    // Dense regime: enumerate the remaining non-edges and draw exactly.
    std::vector<std::pair<Index, Index>> candidates;
    candidates.reserve(static_cast<std::size_t>(available));
    for (Index d = 0; d < n_dev; ++d)
      for (Index m = 0; m < n_apps; ++m)
        if (!blocked.count(edge_key(d, m))) candidates.emplace_back(d, m);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
      out.push_back(candidates[i]);
    }
    return out;
  }

  while (out.size() < count) {
    const Index d = static_cast<Index>(rng.next_below(n_dev));
    const Index m = static_cast<Index>(rng.next_below(n_apps));
    if (!blocked.insert(edge_key(d, m)).second) continue;
    out.emplace_back(d, m);
  }
  return out;
}

LabeledEdgeSet assemble_labeled_set(const Embedding& phi,
                                    const std::vector<std::pair<Index, Index>>& positives,
                                    const std::vector<std::pair<Index, Index>>& negatives,
                                    Combiner combiner) {
  LabeledEdgeSet set;
  set.combiner = combiner;
  set.embedding_graph_hash = phi.graph_hash;
  set.n_positive = positives.size();
  set.n_negative = negatives.size();
  const std::size_t n = positives.size() + negatives.size();
  set.entries.reserve(n);
  set.features.resize(n, combined_dim(combiner, phi.dim()));
  std::size_t row = 0;
  for (const auto& [d, m] : positives) {
    set.entries.push_back({d, m, true});
    set.features.row(row++) = featurize_edge(phi, d, m, combiner);
  }
  for (const auto& [d, m] : negatives) {
    set.entries.push_back({d, m, false});
    set.features.row(row++) = featurize_edge(phi, d, m, combiner);
  }
  return set;
}

DatasetPair build_datasets(const Embedding& phi, const TemporalSplit& split,
                           const BipartiteGraph& graph_train, Combiner combiner,
                           ColdPolicy cold_policy, std::uint64_t seed) {
  if (phi.graph_hash != graph_train.content_hash())
    throw ValidationError("embedding was not trained on the given train graph "
                          "(snapshot hash mismatch); refusing to featurize");

  std::vector<std::pair<Index, Index>> train_pos;
  train_pos.reserve(graph_train.n_edges());
  for (const auto& e : graph_train.edges()) train_pos.emplace_back(e.device, e.app);

  // Test positives resolved against the train graph's index space.
  std::vector<std::pair<Index, Index>> test_pos;
  std::vector<bool> test_pos_cold;
  std::size_t dropped = 0;
  for (const auto& e : split.test_edges) {
    const Index d = graph_train.find_device(e.device_id);
    const Index m = graph_train.find_app(e.app_id);
    const bool cold = d == graph_train.n_devices() || m == graph_train.n_apps();
    if (cold && cold_policy == ColdPolicy::Drop) {
      ++dropped;
      continue;
    }
    test_pos.emplace_back(d, m);
    test_pos_cold.push_back(cold);
  }
  if (test_pos.empty())
    throw ValidationError("no scorable test positives remain under the cold policy");

  EdgeKeySet exclusion;
  for (const auto& [d, m] : test_pos) exclusion.insert(edge_key(d, m));

  auto train_neg = sample_negative_edges(graph_train, train_pos.size(), exclusion,
                                         derive_seed(seed, 1));
  for (const auto& [d, m] : train_neg) exclusion.insert(edge_key(d, m));
  auto test_neg = sample_negative_edges(graph_train, test_pos.size(), exclusion,
                                        derive_seed(seed, 2));

  DatasetPair out;
  out.train = assemble_labeled_set(phi, train_pos, train_neg, combiner);

  // Test set assembled by hand so cold rows can be zero-featurized.
  LabeledEdgeSet& test = out.test;
  test.combiner = combiner;
  test.embedding_graph_hash = phi.graph_hash;
  test.n_positive = test_pos.size();
  test.n_negative = test_neg.size();
  test.cold_dropped = dropped;
  const std::size_t n = test_pos.size() + test_neg.size();
  test.entries.reserve(n);
  test.features.resize(n, combined_dim(combiner, phi.dim()));
  const RowVec zero = RowVec::Zero(phi.dim());
  std::size_t row = 0;
  for (std::size_t i = 0; i < test_pos.size(); ++i) {
    const auto [d, m] = test_pos[i];
    const bool cold = test_pos_cold[i];
    test.entries.push_back({d, m, true, cold});
    if (!cold) {
      test.features.row(row) = featurize_edge(phi, d, m, combiner);
    } else {
      const bool cold_d = d == graph_train.n_devices();
      const bool cold_m = m == graph_train.n_apps();
      auto dv = cold_d ? zero : RowVec(phi.device_vec(d));
      auto mv = cold_m ? zero : RowVec(phi.app_vec(m));
      test.features.row(row) = combine_vectors(dv, mv, combiner);
    }
    ++row;
  }
  for (const auto& [d, m] : test_neg) {
    test.entries.push_back({d, m, false});
    test.features.row(row++) = featurize_edge(phi, d, m, combiner);
  }
  return out;
}

}  // namespace phagraph
