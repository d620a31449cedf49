#include "phagraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "phagraph/alias.hpp"
#include "phagraph/rng.hpp"

namespace phagraph {

void GeneratorConfig::validate() const {
  if (n_devices < 1 || n_apps < 1 || n_groups < 1)
    throw ValidationError("generator requires n_devices, n_apps, n_groups >= 1");
  if (target_edges < 1) throw ValidationError("generator requires target_edges >= 1");
  const double capacity = static_cast<double>(n_devices) * static_cast<double>(n_apps);
  if (static_cast<double>(target_edges) > capacity)
    throw ValidationError("target_edges exceeds n_devices * n_apps");
  if (static_cast<double>(target_edges) > 0.9 * capacity)
    throw ValidationError(
        "target_edges above 90% of the candidate-pair capacity; lower target_edges or raise "
        "n_devices / n_apps");
  if (!(app_exponent > 1.0)) throw ValidationError("app_exponent must exceed 1");
  if (!(affinity >= 1.0)) throw ValidationError("affinity must be >= 1");
  if (!(mixing > 0.0 && mixing <= 1.0)) throw ValidationError("mixing must lie in (0, 1]");
  if (!(device_log_sigma >= 0.0)) throw ValidationError("device_log_sigma must be >= 0");
  if (t_start > t_end) throw ValidationError("time_window start exceeds end");
}

double GroundTruth::group_weight(Index d, Index m) const {
  if (device_group[d] == app_group[m]) return config.affinity;
  return (1.0 - config.mixing) + config.mixing / config.affinity;
}

double GroundTruth::planted_weight(Index d, Index m) const {
  return device_propensity[d] * app_propensity[m] * group_weight(d, m);
}

double GroundTruth::pair_prob(Index d, Index m) const {
  if (!pair_probs.empty())
    return pair_probs[static_cast<std::size_t>(d) * config.n_apps + m];
  return planted_weight(d, m) / weight_norm;
}

bool GroundTruth::has_visible_edge(Index d, Index m) const {
  auto it = std::lower_bound(visible_edges.begin(), visible_edges.end(), std::make_pair(d, m),
                             [](const GtEdge& e, const std::pair<Index, Index>& p) {
                               return e.device != p.first ? e.device < p.first : e.app < p.second;
                             });
  return it != visible_edges.end() && it->device == d && it->app == m;
}

std::string GroundTruth::device_token(Index d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%07u", d);
  return buf;
}

std::string GroundTruth::app_token(Index m) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "m%07u", m);
  return buf;
}

namespace {

// Degree targets k^-gamma on [1, kmax] via inverse CDF.
std::vector<double> draw_power_law_degrees(Index n, double gamma, Index kmax, Rng& rng) {
  std::vector<double> cumulative(kmax);
  double sum = 0.0;
  for (Index k = 1; k <= kmax; ++k) {
    sum += std::pow(static_cast<double>(k), -gamma);
    cumulative[k - 1] = sum;
  }
  for (double& c : cumulative) c /= sum;
  cumulative.back() = 1.0;

  std::vector<double> degrees(n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.next_double();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    degrees[i] = static_cast<double>(1 + (it - cumulative.begin()));
  }
  return degrees;
}

double compute_weight_norm(const GroundTruth& gt) {
  const Index g_count = gt.config.n_groups;
  std::vector<double> dev_mass(g_count, 0.0), app_mass(g_count, 0.0);
  double dev_total = 0.0, app_total = 0.0;
  for (Index d = 0; d < gt.config.n_devices; ++d) {
    dev_mass[gt.device_group[d]] += gt.device_propensity[d];
    dev_total += gt.device_propensity[d];
  }
  for (Index m = 0; m < gt.config.n_apps; ++m) {
    app_mass[gt.app_group[m]] += gt.app_propensity[m];
    app_total += gt.app_propensity[m];
  }
  double same_group = 0.0;
  for (Index g = 0; g < g_count; ++g) same_group += dev_mass[g] * app_mass[g];
  const double out_weight = (1.0 - gt.config.mixing) + gt.config.mixing / gt.config.affinity;
  return gt.config.affinity * same_group + out_weight * (dev_total * app_total - same_group);
}

std::uint64_t pair_key(Index d, Index m) {
  return (static_cast<std::uint64_t>(d) << 32) | m;
}

// Draws `count` distinct pairs from the planted model, skipping pairs in
// `taken` (which is extended with the draws).
std::vector<std::pair<Index, Index>> draw_pairs(const GroundTruth& gt, std::size_t count,
                                                std::unordered_set<std::uint64_t>& taken,
                                                Rng& rng) {
  const AliasTable device_alias(gt.device_propensity);
  const AliasTable app_alias(gt.app_propensity);

  std::vector<std::pair<Index, Index>> out;
  out.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 200 * count + 1000000;
  while (out.size() < count) {
    if (++attempts > max_attempts)
      throw ComputeError("edge sampling did not converge; the planted model leaves too few "
                         "unused candidate pairs");
    const Index d = static_cast<Index>(device_alias.sample(rng));
    const Index m = static_cast<Index>(app_alias.sample(rng));
    if (rng.next_double() * gt.config.affinity > gt.group_weight(d, m)) continue;
    if (!taken.insert(pair_key(d, m)).second) continue;
    out.emplace_back(d, m);
  }
  return out;
}

std::vector<InstallEvent> to_events(const std::vector<GtEdge>& edges) {
  std::vector<InstallEvent> events;
  events.reserve(edges.size());
  for (const auto& e : edges) {
    events.push_back({GroundTruth::device_token(e.device), GroundTruth::app_token(e.app),
                      e.timestamp});
  }
  std::sort(events.begin(), events.end(), [](const InstallEvent& a, const InstallEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.device_id != b.device_id) return a.device_id < b.device_id;
    return a.app_id < b.app_id;
  });
  return events;
}

}  // namespace

SyntheticData generate(const GeneratorConfig& config) {
  config.validate();

  GroundTruth gt;
  gt.config = config;

  Rng group_rng(derive_seed(config.seed, 1));
  Rng app_rng(derive_seed(config.seed, 2));
  Rng dev_rng(derive_seed(config.seed, 3));
  Rng edge_rng(derive_seed(config.seed, 4));
  Rng time_rng(derive_seed(config.seed, 5));

  gt.device_group.resize(config.n_devices);
  for (auto& g : gt.device_group) g = static_cast<Index>(group_rng.next_below(config.n_groups));
  gt.app_group.resize(config.n_apps);
  for (auto& g : gt.app_group) g = static_cast<Index>(group_rng.next_below(config.n_groups));

  gt.app_propensity =
      draw_power_law_degrees(config.n_apps, config.app_exponent, config.n_devices, app_rng);
  // Rescale so expected realized degrees match the drawn targets.
  double app_sum = 0.0;
  for (double w : gt.app_propensity) app_sum += w;
  const double scale = static_cast<double>(config.target_edges) / app_sum;
  for (double& w : gt.app_propensity) w *= scale;

  gt.device_propensity.resize(config.n_devices);
  for (auto& w : gt.device_propensity)
    w = std::exp(config.device_log_mean + config.device_log_sigma * dev_rng.next_gaussian());

  gt.weight_norm = compute_weight_norm(gt);

  std::unordered_set<std::uint64_t> taken;
  taken.reserve(config.target_edges * 2);
  auto pairs = draw_pairs(gt, config.target_edges, taken, edge_rng);

  const std::uint64_t span = static_cast<std::uint64_t>(config.t_end - config.t_start) + 1;
  gt.visible_edges.reserve(pairs.size());
  for (const auto& [d, m] : pairs) {
    const std::int64_t ts = config.t_start + static_cast<std::int64_t>(time_rng.next_below(span));
    gt.visible_edges.push_back({d, m, ts});
  }
  std::sort(gt.visible_edges.begin(), gt.visible_edges.end(), [](const GtEdge& a, const GtEdge& b) {
    return a.device != b.device ? a.device < b.device : a.app < b.app;
  });

  const double candidate_pairs =
      static_cast<double>(config.n_devices) * static_cast<double>(config.n_apps);
  if (candidate_pairs <= 1e6) {
    gt.pair_probs.resize(static_cast<std::size_t>(candidate_pairs));
    for (Index d = 0; d < config.n_devices; ++d)
      for (Index m = 0; m < config.n_apps; ++m)
        gt.pair_probs[static_cast<std::size_t>(d) * config.n_apps + m] =
            gt.planted_weight(d, m) / gt.weight_norm;
  }

  SyntheticData data;
  data.events = to_events(gt.visible_edges);
  data.truth = std::move(gt);
  return data;
}

HoldoutResult holdout_future_edges(const GroundTruth& truth, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ValidationError("holdout fraction must lie strictly between 0 and 1");

  const std::size_t n_visible = truth.visible_edges.size();
  const std::size_t n_future =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * n_visible)));
  const double capacity =
      static_cast<double>(truth.config.n_devices) * static_cast<double>(truth.config.n_apps);
  if (static_cast<double>(n_visible + n_future) > 0.95 * capacity)
    throw ComputeError("holdout fraction leaves too few unused candidate pairs");

  std::unordered_set<std::uint64_t> taken;
  taken.reserve(n_visible * 2 + n_future * 2);
  for (const auto& e : truth.visible_edges) taken.insert(pair_key(e.device, e.app));

  Rng rng(derive_seed(seed, 0xf07e));
  auto pairs = draw_pairs(truth, n_future, taken, rng);

  const std::int64_t visible_end = truth.config.t_end;
  const std::int64_t visible_span = truth.config.t_end - truth.config.t_start + 1;
  const std::uint64_t future_span =
      std::max<std::int64_t>(1, std::llround(static_cast<double>(visible_span) * fraction));

  std::vector<GtEdge> future_edges;
  future_edges.reserve(pairs.size());
  for (const auto& [d, m] : pairs) {
    const std::int64_t ts =
        visible_end + 1 + static_cast<std::int64_t>(rng.next_below(future_span));
    future_edges.push_back({d, m, ts});
  }

  HoldoutResult result;
  result.visible = to_events(truth.visible_edges);
  result.future = to_events(future_edges);
  return result;
}

void write_ground_truth(const std::string& path, const GroundTruth& truth) {
  nlohmann::json doc;
  doc["format_version"] = "1";
  doc["config"] = {{"n_devices", truth.config.n_devices},
                   {"n_apps", truth.config.n_apps},
                   {"target_edges", truth.config.target_edges},
                   {"app_exponent", truth.config.app_exponent},
                   {"n_groups", truth.config.n_groups},
                   {"affinity", truth.config.affinity},
                   {"mixing", truth.config.mixing},
                   {"device_log_mean", truth.config.device_log_mean},
                   {"device_log_sigma", truth.config.device_log_sigma},
                   {"time_window", {truth.config.t_start, truth.config.t_end}},
                   {"seed", truth.config.seed}};
  doc["device_groups"] = truth.device_group;
  doc["app_groups"] = truth.app_group;
  doc["device_propensities"] = truth.device_propensity;
  doc["app_propensities"] = truth.app_propensity;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write ground truth: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace phagraph
