#include "phagraph/trainer.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phagraph {

namespace {
constexpr double kDeltaClamp = 1e6;  // log argument clamp; gradient is flat beyond
}

int TrainerConfig::pairs_per_walk() const {
  const std::size_t edges = walk_edges();
  const int reachable = static_cast<int>((edges + 1) / 2);
  return std::min(max_order, reachable);
}

std::vector<std::string> TrainerConfig::validate() const {
  if (dim < 1) throw ValidationError("embedding dim must be >= 1");
  if (max_order < 1) throw ValidationError("max_order must be >= 1");
  if (walk_length < 1 || (walk_length_in_vertices && walk_length < 2))
    throw ValidationError("walk_length too short to contain an edge");
  if (walks_per_vertex < 0) throw ValidationError("walks_per_vertex must be >= 0");
  if (neg_samples < 1) throw ValidationError("neg_samples must be >= 1");
  if (margin_k < 0) throw ValidationError("margin_k must be >= 1 (or 0 for the default)");
  if (!(margin_epsilon > 0.0)) throw ValidationError("margin_epsilon must be positive");
  if (!(reg_lambda >= 0.0)) throw ValidationError("reg_lambda must be >= 0");
  if (!(learning_rate > 0.0) || !(min_learning_rate > 0.0))
    throw ValidationError("learning rates must be positive");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (!(init_half_range > 0.0)) throw ValidationError("init_half_range must be positive");

  std::vector<std::string> warnings;
  if (static_cast<int>(walk_edges()) < 2 * max_order) {
    warnings.push_back("walk_length " + std::to_string(walk_length) + " cannot reach order " +
                       std::to_string(max_order) + " pairs; ranks above " +
                       std::to_string(pairs_per_walk()) + " will never be sampled");
  }
  if (walk_length_in_vertices)
    warnings.push_back("walk_length interpreted as a vertex count (" +
                       std::to_string(walk_edges()) + " edges per walk)");
  return warnings;
}

RankingGradient ranking_gradient(Eigen::Ref<const RowVec> device, Eigen::Ref<const RowVec> positive,
                                 Eigen::Ref<const RowVec> negative, double weight,
                                 double threshold) {
  RankingGradient g;
  const double delta = device.dot(negative) - device.dot(positive);
  if (!std::isfinite(delta))
    throw ComputeError("non-finite score gap in ranking objective; reduce the learning rate");
  const int d = static_cast<int>(device.size());
  g.wrt_device = Vec::Zero(d);
  g.wrt_positive = Vec::Zero(d);
  g.wrt_negative = Vec::Zero(d);
  if (delta <= threshold) return g;
  g.active = true;
  g.loss = weight * std::log(std::min(delta, kDeltaClamp));
  if (delta >= kDeltaClamp) return g;  // clamped plateau
  const double coeff = weight / delta;
  g.wrt_device = coeff * (negative - positive).transpose();
  g.wrt_positive = -coeff * device.transpose();
  g.wrt_negative = coeff * device.transpose();
  return g;
}

double ranking_step(Embedding& phi, const ProximityPair& pair, std::span<const Index> negatives,
                    const TrainerConfig& config, double learning_rate) {
  const int d = phi.dim();
  const double threshold = config.margin_threshold();
  const double decay = 1.0 - learning_rate * 2.0 * config.reg_lambda;

  Scalar* dev = phi.device_row(pair.device);
  Scalar* pos = phi.app_row(pair.app);
  Eigen::Map<RowVec> dev_v(dev, d);
  Eigen::Map<RowVec> pos_v(pos, d);

  // Device row snapshot: app updates use the value the gradient was taken at.
  RowVec dev_old = dev_v;
  RowVec dev_acc = RowVec::Zero(d);

  const double dot_pos = dev_old.dot(pos_v);
  if (!std::isfinite(dot_pos))
    throw ComputeError("non-finite dot product during training; reduce the learning rate");

  double loss = 0.0;
  double pos_coeff_sum = 0.0;
  for (Index neg : negatives) {
    Eigen::Map<RowVec> neg_v(phi.app_row(neg), d);
    const double dot_neg = dev_old.dot(neg_v);
    if (!std::isfinite(dot_neg))
      throw ComputeError("non-finite dot product during training; reduce the learning rate");
    const double delta = dot_neg - dot_pos;
    if (delta > threshold) {
      loss += pair.weight * std::log(std::min(delta, kDeltaClamp));
      if (delta < kDeltaClamp) {
        const double coeff = pair.weight / delta;
        dev_acc += coeff * (neg_v - pos_v);
        pos_coeff_sum += coeff;
        neg_v -= (learning_rate * coeff) * dev_old;
      }
    }
    neg_v *= decay;
  }

  pos_v += (learning_rate * pos_coeff_sum) * dev_old;
  pos_v *= decay;
  dev_v -= learning_rate * dev_acc;
  dev_v *= decay;
  return loss;
}

Embedding train_embedding(const BipartiteGraph& graph, const TrainerConfig& config) {
  config.validate();
  if (graph.n_devices() == 0) throw ValidationError("training requires at least one device");
  if (graph.n_apps() == 0) throw ValidationError("training requires at least one app");

  Embedding phi;
  phi.n_devices = graph.n_devices();
  phi.graph_hash = graph.content_hash();
  phi.vectors.resize(graph.n_vertices(), config.dim);
  {
    Rng init_rng(derive_seed(config.seed, 0x696e6974));
    const double lo = config.init_nonnegative ? 0.0 : -config.init_half_range;
    const double hi = config.init_nonnegative ? 2.0 * config.init_half_range
                                              : config.init_half_range;
    Scalar* data = phi.vectors.data();
    const std::size_t total = static_cast<std::size_t>(phi.vectors.size());
    for (std::size_t i = 0; i < total; ++i) data[i] = init_rng.next_double(lo, hi);
  }

  const std::size_t pairs_per_device =
      static_cast<std::size_t>(config.walks_per_vertex) * config.pairs_per_walk();
  const std::size_t total_pairs = static_cast<std::size_t>(config.epochs) * graph.n_devices() *
                                  pairs_per_device;

  if (total_pairs == 0) {
    // Degenerate empty corpus: only the L2 term of the objective acts.
    for (int epoch = 0; epoch < config.epochs; ++epoch)
      phi.vectors *= (1.0 - config.learning_rate * 2.0 * config.reg_lambda);
    return phi;
  }

  const WalkSampler sampler(graph, config.kernel);
  const std::size_t walk_edges = config.walk_edges();
  const double lr0 = config.learning_rate;
  const double lr_min = config.min_learning_rate;

  std::atomic<std::size_t> pair_counter{0};
  std::atomic<bool> failed{false};
  std::string failure;

  const int first_averaged_epoch = config.tail_average ? config.epochs / 2 : config.epochs;
  Mat averaged;
  int averaged_count = 0;

#ifdef _OPENMP
  const int n_threads = config.workers;
#endif

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, 0x7761, static_cast<std::uint64_t>(epoch));
    const Index n_dev = graph.n_devices();

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) num_threads(n_threads)
#endif
    for (long long dev_ll = 0; dev_ll < static_cast<long long>(n_dev); ++dev_ll) {
      if (failed.load(std::memory_order_relaxed)) continue;
      const Index device = static_cast<Index>(dev_ll);
      Rng rng(derive_seed(epoch_seed, device));
      std::vector<ProximityPair> pairs;
      std::vector<Index> negatives(config.neg_samples);
      try {
        for (int w = 0; w < config.walks_per_vertex; ++w) {
          const Walk walk = sample_walk(sampler, device, walk_edges, rng);
          extract_pairs_into(walk, config.max_order, pairs);
          for (const ProximityPair& pair : pairs) {
            for (auto& n : negatives)
              n = static_cast<Index>(rng.next_below(graph.n_apps()));
            const std::size_t t = pair_counter.fetch_add(1, std::memory_order_relaxed);
            const double lr =
                std::max(lr_min, lr0 * (1.0 - static_cast<double>(t) / total_pairs));
            ranking_step(phi, pair, negatives, config, lr);
          }
        }
      } catch (const std::exception& e) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) failure = e.what();
      }
    }
    if (failed.load()) throw ComputeError("training aborted: " + failure);
    if (!phi.vectors.allFinite())
      throw ComputeError("training produced non-finite embeddings; reduce the learning rate");
    if (epoch >= first_averaged_epoch) {
      if (averaged_count == 0) {
        averaged = phi.vectors;
      } else {
        averaged += phi.vectors;
      }
      ++averaged_count;
    }
  }
  if (averaged_count > 1) phi.vectors = averaged / static_cast<double>(averaged_count);
  return phi;
}

}  // namespace phagraph
