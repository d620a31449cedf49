#include "phagraph/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "phagraph/hash.hpp"
#include "phagraph/rng.hpp"

namespace phagraph {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<char> candidate_labels(std::size_t n_pos, std::size_t n_neg) {
  std::vector<char> labels(n_pos + n_neg, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  return labels;
}

}  // namespace

PreparedData prepare_synthetic_dataset(const ExperimentDataConfig& cfg, std::uint64_t seed) {
  GeneratorConfig gen = cfg.generator;
  gen.seed = derive_seed(seed, 0x67656e);
  SyntheticData data = generate(gen);
  HoldoutResult holdout =
      holdout_future_edges(data.truth, cfg.holdout_fraction, derive_seed(seed, 0x686f6c64));

  PreparedData prepared;
  prepared.visible = std::move(holdout.visible);
  prepared.future = std::move(holdout.future);
  prepared.graph = build_graph(prepared.visible);

  EdgeKeySet exclusion;
  for (const auto& ev : prepared.future) {
    const Index d = prepared.graph.find_device(ev.device_id);
    const Index m = prepared.graph.find_app(ev.app_id);
    if (d == prepared.graph.n_devices() || m == prepared.graph.n_apps()) {
      ++prepared.cold_dropped;
      continue;
    }
    prepared.test_pos.emplace_back(d, m);
    exclusion.insert(edge_key(d, m));
  }
  if (prepared.test_pos.empty())
    throw ComputeError("no warm test positives; enlarge the corpus or lower the holdout fraction");

  prepared.train_neg = sample_negative_edges(prepared.graph, prepared.graph.n_edges(), exclusion,
                                             derive_seed(seed, 0x746e6567));
  for (const auto& [d, m] : prepared.train_neg) exclusion.insert(edge_key(d, m));
  prepared.test_neg = sample_negative_edges(prepared.graph, prepared.test_pos.size(), exclusion,
                                            derive_seed(seed, 0x736e6567));
  return prepared;
}

EvalReport evaluate_method(const std::string& method, const PreparedData& data,
                           const MethodsConfig& methods, std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  EvalReport report;

  if (method == "pa") {
    std::vector<ScoredItem> items;
    items.reserve(data.test_pos.size() + data.test_neg.size());
    for (const auto& [d, m] : data.test_pos) items.push_back({pa_score(data.graph, d, m), true});
    for (const auto& [d, m] : data.test_neg) items.push_back({pa_score(data.graph, d, m), false});
    report = roc_and_metrics(items, methods.fpr_targets);
    report.timings_sec["score"] = seconds_since(t_start);
  } else {
    Embedding phi;
    Fnv1a method_tag;
    method_tag.add(method);
    const std::uint64_t method_seed = derive_seed(seed, method_tag.value());
    const auto t_embed = std::chrono::steady_clock::now();
    if (method == "full" || method == "full_k1") {
      TrainerConfig cfg = methods.trainer;
      cfg.seed = method_seed;
      if (method == "full_k1") cfg.max_order = 1;
      phi = train_embedding(data.graph, cfg);
    } else if (method == "first_order" || method == "second_order") {
      BaselineConfig cfg = methods.baseline;
      cfg.seed = method_seed;
      phi = method == "first_order" ? train_first_order(data.graph, cfg)
                                    : train_second_order(data.graph, cfg);
    } else {
      throw ValidationError("unknown method '" + method +
                            "' (expected pa, first_order, second_order, full or full_k1)");
    }
    const double embed_sec = seconds_since(t_embed);

    std::vector<std::pair<Index, Index>> train_pos;
    train_pos.reserve(data.graph.n_edges());
    for (const auto& e : data.graph.edges()) train_pos.emplace_back(e.device, e.app);

    const auto t_clf = std::chrono::steady_clock::now();
    LabeledEdgeSet train_set =
        assemble_labeled_set(phi, train_pos, data.train_neg, methods.combiner);
    auto model = train_classifier(train_set, methods.classifier, derive_seed(seed, 0x636c66),
                                  methods.classifier_params);
    const double clf_sec = seconds_since(t_clf);

    LabeledEdgeSet test_set =
        assemble_labeled_set(phi, data.test_pos, data.test_neg, methods.combiner);
    Vec scores = predict_scores(*model, test_set);
    report = roc_and_metrics(scores, candidate_labels(data.test_pos.size(), data.test_neg.size()),
                             methods.fpr_targets);
    report.timings_sec["embedding"] = embed_sec;
    report.timings_sec["classifier"] = clf_sec;
  }

  report.method = method;
  report.seed = seed;
  report.counts["test_positives"] = static_cast<double>(data.test_pos.size());
  report.counts["test_negatives"] = static_cast<double>(data.test_neg.size());
  report.counts["train_edges"] = static_cast<double>(data.graph.n_edges());
  report.counts["cold_dropped"] = static_cast<double>(data.cold_dropped);
  report.timings_sec["total"] = seconds_since(t_start);
  return report;
}

std::vector<MethodResult> comparison_experiment(const ExperimentDataConfig& data_cfg,
                                                const std::vector<std::string>& methods,
                                                const MethodsConfig& methods_cfg,
                                                std::uint64_t seed) {
  if (methods.empty()) throw ValidationError("comparison experiment needs at least one method");
  const PreparedData data = prepare_synthetic_dataset(data_cfg, seed);

  std::vector<MethodResult> results;
  for (const auto& method : methods) {
    MethodResult r;
    r.method = method;
    try {
      r.report = evaluate_method(method, data, methods_cfg, seed);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<LatencyRow> latency_experiment(const ExperimentDataConfig& data_cfg,
                                           const std::vector<double>& drop_ratios,
                                           const MethodsConfig& methods_cfg, std::uint64_t seed) {
  for (double r : drop_ratios)
    if (!(r >= 0.0 && r < 1.0)) throw ValidationError("drop ratios must lie in [0, 1)");
  std::vector<double> ratios(drop_ratios);
  std::sort(ratios.begin(), ratios.end());

  const PreparedData base = prepare_synthetic_dataset(data_cfg, seed);
  const std::size_t n_events = base.visible.size();

  // One shared permutation; ratio r drops the first r*n events, so the
  // removed sets nest as the ratio grows.
  std::vector<std::size_t> perm(n_events);
  for (std::size_t i = 0; i < n_events; ++i) perm[i] = i;
  Rng rng(derive_seed(seed, 0x64726f70));
  for (std::size_t i = n_events; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.next_below(i)]);

  struct RatioData {
    double ratio;
    BipartiteGraph graph;
  };
  std::vector<RatioData> ratio_graphs;
  for (double r : ratios) {
    const std::size_t n_drop = static_cast<std::size_t>(std::llround(r * n_events));
    if (n_drop >= n_events) throw ValidationError("drop ratio removes every training event");
    std::vector<InstallEvent> kept;
    kept.reserve(n_events - n_drop);
    for (std::size_t i = n_drop; i < n_events; ++i) kept.push_back(base.visible[perm[i]]);
    std::sort(kept.begin(), kept.end(), [](const InstallEvent& a, const InstallEvent& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      if (a.device_id != b.device_id) return a.device_id < b.device_id;
      return a.app_id < b.app_id;
    });
    ratio_graphs.push_back({r, build_graph(kept)});
  }

  // Fixed test set: candidates must be warm under the heaviest drop. Removed
  // events nest, so warm there implies warm everywhere.
  const BipartiteGraph& smallest = ratio_graphs.back().graph;
  auto warm_in_smallest = [&](Index d, Index m) {
    const Index sd = smallest.find_device(base.graph.device_token(d));
    const Index sm = smallest.find_app(base.graph.app_token(m));
    return sd != smallest.n_devices() && sm != smallest.n_apps();
  };
  std::vector<std::pair<Index, Index>> test_pos, test_neg;
  for (const auto& [d, m] : base.test_pos)
    if (warm_in_smallest(d, m)) test_pos.emplace_back(d, m);
  for (const auto& [d, m] : base.test_neg)
    if (warm_in_smallest(d, m)) test_neg.emplace_back(d, m);
  const std::size_t n_candidates = std::min(test_pos.size(), test_neg.size());
  test_pos.resize(n_candidates);  // keep the classes balanced
  test_neg.resize(n_candidates);
  if (n_candidates == 0)
    throw ComputeError("no test candidates survive the heaviest drop ratio");

  std::vector<LatencyRow> rows;
  for (const auto& rd : ratio_graphs) {
    PreparedData data;
    data.graph = rd.graph;
    data.cold_dropped = base.test_pos.size() - test_pos.size();
    for (const auto& [d, m] : test_pos)
      data.test_pos.emplace_back(rd.graph.find_device(base.graph.device_token(d)),
                                 rd.graph.find_app(base.graph.app_token(m)));
    for (const auto& [d, m] : test_neg)
      data.test_neg.emplace_back(rd.graph.find_device(base.graph.device_token(d)),
                                 rd.graph.find_app(base.graph.app_token(m)));

    EdgeKeySet exclusion;
    for (const auto& [d, m] : data.test_pos) exclusion.insert(edge_key(d, m));
    data.train_neg = sample_negative_edges(rd.graph, rd.graph.n_edges(), exclusion,
                                           derive_seed(seed, 0x746e, static_cast<std::uint64_t>(
                                                                         rd.ratio * 1e6)));

    EvalReport report = evaluate_method("full", data, methods_cfg, seed);
    report.counts["drop_ratio"] = rd.ratio;
    rows.push_back({rd.ratio, std::move(report)});
  }
  return rows;
}

RollingSummary rolling_window_experiment(const std::vector<InstallEvent>& events,
                                         std::int64_t train_window, std::int64_t test_window,
                                         int steps, const MethodsConfig& methods_cfg,
                                         std::uint64_t seed) {
  if (events.empty()) throw ValidationError("rolling experiment requires events");
  if (train_window <= 0 || test_window <= 0)
    throw ValidationError("rolling windows must be positive durations");
  if (steps < 1) throw ValidationError("rolling experiment requires steps >= 1");

  std::int64_t t0 = events.front().timestamp, t_max = events.front().timestamp;
  for (const auto& ev : events) {
    t0 = std::min(t0, ev.timestamp);
    t_max = std::max(t_max, ev.timestamp);
  }
  const std::int64_t span_needed =
      train_window + test_window + static_cast<std::int64_t>(steps - 1) * test_window;
  if (t_max - t0 + 1 < span_needed)
    throw ValidationError("event span does not cover the requested rolling steps");

  RollingSummary summary;
  std::vector<double> aucs;
  std::map<double, std::vector<double>> tprs;

  for (int s = 0; s < steps; ++s) {
    RollingStep step;
    step.step = s;
    const std::int64_t w_start = t0 + static_cast<std::int64_t>(s) * test_window;
    const std::int64_t boundary = w_start + train_window - 1;
    try {
      std::vector<InstallEvent> window_events;
      for (const auto& ev : events)
        if (ev.timestamp >= w_start && ev.timestamp <= boundary + test_window)
          window_events.push_back(ev);

      const TemporalSplit split = temporal_split(window_events, boundary, test_window);
      PreparedData data;
      data.graph = build_graph(split_edges_to_events(split.train_edges));
      EdgeKeySet exclusion;
      for (const auto& e : split.test_edges) {
        const Index d = data.graph.find_device(e.device_id);
        const Index m = data.graph.find_app(e.app_id);
        if (d == data.graph.n_devices() || m == data.graph.n_apps()) {
          ++data.cold_dropped;
          continue;
        }
        data.test_pos.emplace_back(d, m);
        exclusion.insert(edge_key(d, m));
      }
      if (data.test_pos.empty()) throw ComputeError("no warm test positives in window");

      const std::uint64_t step_seed = derive_seed(seed, 0x726f6c6c, static_cast<std::uint64_t>(s));
      data.train_neg = sample_negative_edges(data.graph, data.graph.n_edges(), exclusion,
                                             derive_seed(step_seed, 1));
      for (const auto& [d, m] : data.train_neg) exclusion.insert(edge_key(d, m));
      data.test_neg = sample_negative_edges(data.graph, data.test_pos.size(), exclusion,
                                            derive_seed(step_seed, 2));

      EvalReport report = evaluate_method("full", data, methods_cfg, step_seed);
      aucs.push_back(report.auc);
      for (const auto& [target, pt] : report.tpr_at) tprs[target].push_back(pt.tpr);
      step.report = std::move(report);
    } catch (const std::exception& e) {
      step.skipped = true;
      step.skip_reason = e.what();
    }
    summary.steps.push_back(std::move(step));
  }

  auto mean_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  auto stddev_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / (v.size() - 1));
  };
  summary.auc_mean = mean_of(aucs);
  summary.auc_stddev = stddev_of(aucs);
  for (const auto& [target, values] : tprs) {
    summary.tpr_mean[target] = mean_of(values);
    summary.tpr_stddev[target] = stddev_of(values);
  }
  return summary;
}

std::vector<RuntimeRow> runtime_experiment(const ExperimentDataConfig& base,
                                           const std::vector<double>& scale_multipliers,
                                           const MethodsConfig& methods_cfg, std::uint64_t seed) {
  if (scale_multipliers.size() < 2)
    throw ValidationError("runtime scaling needs at least two scale points");

  std::vector<RuntimeRow> rows;
  for (std::size_t i = 0; i < scale_multipliers.size(); ++i) {
    const double mult = scale_multipliers[i];
    if (!(mult > 0.0)) throw ValidationError("scale multipliers must be positive");
    ExperimentDataConfig cfg = base;
    cfg.generator.n_devices = static_cast<Index>(std::llround(base.generator.n_devices * mult));
    cfg.generator.n_apps = static_cast<Index>(
        std::max<long long>(1, std::llround(base.generator.n_apps * mult)));
    cfg.generator.target_edges =
        static_cast<std::size_t>(std::llround(static_cast<double>(base.generator.target_edges) * mult));

    const PreparedData data = prepare_synthetic_dataset(cfg, derive_seed(seed, i));

    RuntimeRow row;
    row.label = "x" + std::to_string(mult);
    row.n_events = data.visible.size();

    auto t0 = std::chrono::steady_clock::now();
    const BipartiteGraph graph = build_graph(data.visible);
    row.graph_sec = seconds_since(t0);
    row.n_edges = graph.n_edges();

    TrainerConfig tcfg = methods_cfg.trainer;
    tcfg.seed = derive_seed(seed, 0x7274, i);
    t0 = std::chrono::steady_clock::now();
    const Embedding phi = train_embedding(graph, tcfg);
    row.embed_sec = seconds_since(t0);

    std::vector<std::pair<Index, Index>> train_pos;
    for (const auto& e : graph.edges()) train_pos.emplace_back(e.device, e.app);
    LabeledEdgeSet train_set =
        assemble_labeled_set(phi, train_pos, data.train_neg, methods_cfg.combiner);
    t0 = std::chrono::steady_clock::now();
    auto model = train_classifier(train_set, methods_cfg.classifier, derive_seed(seed, 0x7263, i),
                                  methods_cfg.classifier_params);
    row.classifier_sec = seconds_since(t0);

    if (!rows.empty()) {
      row.edge_ratio = static_cast<double>(row.n_edges) / rows.back().n_edges;
      row.embed_ratio = row.embed_sec / std::max(1e-9, rows.back().embed_sec);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace phagraph
