#include "phagraph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phagraph/rng.hpp"

namespace phagraph {

PowerLawFit fit_power_law(const std::vector<Index>& degrees) {
  PowerLawFit fit;
  if (degrees.empty()) return fit;

  std::vector<Index> sorted(degrees);
  std::sort(sorted.begin(), sorted.end());
  std::vector<Index> distinct(sorted);
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 10) return fit;  // caller reports the exponent as unreliable

  double best_ks = std::numeric_limits<double>::infinity();

  // Scan candidate cutoffs; keep at least a 10-point tail so the MLE is sane.
  for (Index x_min : distinct) {
    if (x_min < 2) continue;  // the shifted-continuous MLE needs x_min - 0.5 > 1
    auto tail_begin = std::lower_bound(sorted.begin(), sorted.end(), x_min);
    const std::size_t n_tail = static_cast<std::size_t>(sorted.end() - tail_begin);
    if (n_tail < 10) break;

    double log_sum = 0.0;
    for (auto it = tail_begin; it != sorted.end(); ++it)
      log_sum += std::log(static_cast<double>(*it) / (x_min - 0.5));
    if (log_sum <= 0.0) continue;
    const double alpha = 1.0 + static_cast<double>(n_tail) / log_sum;

    // KS distance between the empirical tail CCDF and the fitted model,
    // using the shifted continuous approximation of the discrete law.
    double ks = 0.0;
    std::size_t seen = 0;
    for (auto it = tail_begin; it != sorted.end();) {
      auto run_end = std::upper_bound(it, sorted.end(), *it);
      seen += static_cast<std::size_t>(run_end - it);
      const double emp_ccdf = 1.0 - static_cast<double>(seen) / n_tail;
      const double model_ccdf =
          std::pow((static_cast<double>(*it) + 0.5) / (x_min - 0.5), 1.0 - alpha);
      ks = std::max(ks, std::abs(emp_ccdf - model_ccdf));
      it = run_end;
    }
    if (ks < best_ks) {
      best_ks = ks;
      fit.alpha = alpha;
      fit.x_min = x_min;
      fit.ks_distance = ks;
      fit.reliable = true;
    }
  }
  return fit;
}

DegreeHistogram degree_histogram(const BipartiteGraph& graph, Side side) {
  const Index n = side == Side::Device ? graph.n_devices() : graph.n_apps();
  if (n == 0) throw ValidationError("degree histogram requires a non-empty graph side");

  DegreeHistogram hist;
  std::vector<Index> degrees;
  degrees.reserve(n);
  for (Index v = 0; v < n; ++v) {
    const Index deg = side == Side::Device ? graph.device_degree(v) : graph.app_degree(v);
    degrees.push_back(deg);
    ++hist.counts[deg];
  }
  const PowerLawFit fit = fit_power_law(degrees);
  hist.alpha = fit.alpha;
  hist.x_min = fit.x_min;
  hist.ks_distance = fit.ks_distance;
  hist.reliable = fit.reliable;
  return hist;
}

namespace {

// Distinct apps reachable from `start` by walks of exactly `hops` steps,
// excluding the start vertex. Returns false if that set is empty.
bool expand_exact(const BipartiteGraph& graph, Index start, int hops, std::vector<Index>& out,
                  std::vector<Index>& app_stamp, std::vector<Index>& dev_stamp, Index stamp) {
  std::vector<Index> frontier{start};
  std::vector<Index> next;
  bool on_app_side = true;
  for (int h = 0; h < hops; ++h) {
    next.clear();
    ++stamp;
    auto& stamps = on_app_side ? dev_stamp : app_stamp;  // side of the vertices we step TO
    for (Index v : frontier) {
      auto nbrs = on_app_side ? graph.app_neighbors(v) : graph.device_neighbors(v);
      for (Index u : nbrs) {
        if (stamps[u] != stamp) {
          stamps[u] = stamp;
          next.push_back(u);
        }
      }
    }
    frontier.swap(next);
    on_app_side = !on_app_side;
  }
  out.clear();
  for (Index v : frontier)
    if (v != start) out.push_back(v);
  return !out.empty();
}

}  // namespace

double khop_degree_correlation(const BipartiteGraph& graph, int hops, std::size_t sample_size,
                               std::uint64_t seed) {
  if (hops <= 0 || hops % 2 != 0)
    throw ValidationError("k-hop correlation requires an even, positive hop count");
  if (sample_size < 2) throw ValidationError("k-hop correlation requires sample_size >= 2");

  const Index n_apps = graph.n_apps();
  std::vector<Index> candidates(n_apps);
  std::iota(candidates.begin(), candidates.end(), Index{0});
  if (sample_size < n_apps) {
    Rng rng(derive_seed(seed, 0x6b686f70));
    for (std::size_t i = 0; i < sample_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n_apps - i));
      std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(sample_size);
    std::sort(candidates.begin(), candidates.end());
  }

  std::vector<double> xs, ys;
  xs.reserve(candidates.size());
  ys.reserve(candidates.size());

  std::vector<Index> reach;
  std::vector<Index> app_stamp(graph.n_apps(), 0), dev_stamp(graph.n_devices(), 0);
  Index stamp = 0;
  for (Index m : candidates) {
    if (!expand_exact(graph, m, hops, reach, app_stamp, dev_stamp, stamp)) {
      stamp += static_cast<Index>(hops);
      continue;
    }
    stamp += static_cast<Index>(hops);
    double mean_deg = 0.0;
    for (Index other : reach) mean_deg += graph.app_degree(other);
    mean_deg /= static_cast<double>(reach.size());
    xs.push_back(graph.app_degree(m));
    ys.push_back(mean_deg);
  }

  if (xs.size() < 2)
    throw ComputeError("no app with a complete " + std::to_string(hops) + "-hop path");

  const double n = static_cast<double>(xs.size());
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw ComputeError("k-hop correlation undefined: zero variance in degrees or neighborhood means");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace phagraph
