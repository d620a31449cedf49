#include "phagraph/baselines.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "phagraph/rng.hpp"

namespace phagraph {

double pa_score(const BipartiteGraph& graph, Index device, Index app) {
  if (device >= graph.n_devices() || app >= graph.n_apps())
    throw ValidationError("pa_score index out of range");
  return static_cast<double>(graph.device_degree(device)) *
         static_cast<double>(graph.app_degree(app)) / (2.0 * graph.n_edges());
}

std::vector<double> pa_scores(const BipartiteGraph& graph,
                              const std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [d, m] : pairs) out.push_back(pa_score(graph, d, m));
  return out;
}

void BaselineConfig::validate() const {
  if (dim < 1) throw ValidationError("baseline dim must be >= 1");
  if (neg_samples < 1) throw ValidationError("baseline neg_samples must be >= 1");
  if (!(learning_rate > 0.0) || !(min_learning_rate > 0.0))
    throw ValidationError("baseline learning rates must be positive");
  if (epochs < 1) throw ValidationError("baseline epochs must be >= 1");
  if (workers < 1) throw ValidationError("baseline workers must be >= 1");
}

namespace {

inline double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// One directed logistic update source -> target with `negs` uniform negatives
// drawn from the target side of `ctx`. Writes go to source rows of `emb`
// and target rows of `ctx` (which aliases `emb` for first-order).
void directed_update(Scalar* src, Mat& ctx_rows, Eigen::Index ctx_offset, Index target,
                     Index n_targets, int dim, int negs, double lr, Rng& rng) {
  Eigen::Map<RowVec> src_v(src, dim);
  RowVec src_old = src_v;
  RowVec acc = RowVec::Zero(dim);
  for (int k = 0; k <= negs; ++k) {
    const Index tgt = k == 0 ? target : static_cast<Index>(rng.next_below(n_targets));
    const double label = k == 0 ? 1.0 : 0.0;
    Eigen::Map<RowVec> tgt_v(ctx_rows.row(ctx_offset + tgt).data(), dim);
    const double g = label - sigmoid(src_old.dot(tgt_v));
    acc += g * tgt_v;
    tgt_v += (lr * g) * src_old;
  }
  src_v += lr * acc;
}

Embedding train_proximity(const BipartiteGraph& graph, const BaselineConfig& config,
                          bool use_context) {
  config.validate();

  Embedding phi;
  phi.n_devices = graph.n_devices();
  phi.graph_hash = graph.content_hash();
  phi.vectors.resize(graph.n_vertices(), config.dim);

  Mat context;  // second-order only
  {
    Rng init_rng(derive_seed(config.seed, 0x62617365));
    const double half = 0.5 / config.dim;
    Scalar* data = phi.vectors.data();
    for (Eigen::Index i = 0; i < phi.vectors.size(); ++i)
      data[i] = init_rng.next_double(-half, half);
    if (use_context) context = Mat::Zero(graph.n_vertices(), config.dim);
  }
  Mat& target_rows = phi.vectors;
  Mat& ctx_rows = use_context ? context : phi.vectors;

  const std::size_t draws_per_epoch = graph.n_edges();
  const std::size_t total_draws = draws_per_epoch * static_cast<std::size_t>(config.epochs);
  const auto& edges = graph.edges();
  const Index n_dev = graph.n_devices();
  const Index n_apps = graph.n_apps();

  std::atomic<bool> failed{false};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed =
        derive_seed(config.seed, 0x65646765, static_cast<std::uint64_t>(epoch));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 256) num_threads(config.workers)
#endif
    for (long long i = 0; i < static_cast<long long>(draws_per_epoch); ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      Rng rng(derive_seed(epoch_seed, static_cast<std::uint64_t>(i)));
      const std::size_t t = static_cast<std::size_t>(epoch) * draws_per_epoch + i;
      const double lr = std::max(config.min_learning_rate,
                                 config.learning_rate *
                                     (1.0 - static_cast<double>(t) / total_draws));
      const auto& e = edges[rng.next_below(edges.size())];
      // Both directions of the undirected edge.
      directed_update(target_rows.row(e.device).data(), ctx_rows, n_dev, e.app, n_apps,
                      config.dim, config.neg_samples, lr, rng);
      directed_update(target_rows.row(n_dev + e.app).data(), ctx_rows, 0, e.device, n_dev,
                      config.dim, config.neg_samples, lr, rng);
    }
    if (!phi.vectors.allFinite()) {
      throw ComputeError("baseline training produced non-finite embeddings; "
                         "reduce the learning rate");
    }
  }
  return phi;
}

}  // namespace

Embedding train_first_order(const BipartiteGraph& graph, const BaselineConfig& config) {
  return train_proximity(graph, config, /*use_context=*/false);
}

Embedding train_second_order(const BipartiteGraph& graph, const BaselineConfig& config) {
  return train_proximity(graph, config, /*use_context=*/true);
}

}  // namespace phagraph
