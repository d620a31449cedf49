// phagraph: bipartite installation-graph link prediction toolkit.
//
// Subcommands: generate, build-graph, train, predict, experiment <kind>,
// explain, export. Exit codes: 0 success, 1 validation, 2 runtime, 3 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "phagraph/baselines.hpp"
#include "phagraph/classifier.hpp"
#include "phagraph/dataset.hpp"
#include "phagraph/events.hpp"
#include "phagraph/experiments.hpp"
#include "phagraph/explain.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/hash.hpp"
#include "phagraph/io.hpp"
#include "phagraph/metrics.hpp"
#include "phagraph/stats.hpp"
#include "phagraph/synthetic.hpp"
#include "phagraph/trainer.hpp"
#include "phagraph/walk.hpp"

using namespace phagraph;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool overwrite = false;
  std::string format = "csv";
};

json load_config(const std::string& path) {
  if (path.empty()) throw ValidationError("missing --config");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("config file is not valid JSON: " + path);
  if (!doc.is_object()) throw ParseError("config root must be a JSON object: " + path);
  return doc;
}

template <class T>
T require_field(const json& doc, const std::string& field) {
  if (!doc.contains(field))
    throw ValidationError("config is missing required field '" + field + "'");
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field '" + field + "' has the wrong type");
  }
}

template <class T>
T field_or(const json& doc, const std::string& field, T fallback) {
  if (!doc.contains(field)) return fallback;
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field '" + field + "' has the wrong type");
  }
}

std::uint64_t resolve_seed(const GlobalOpts& opts, const json& config) {
  if (opts.seed) return *opts.seed;
  if (config.contains("seed")) return require_field<std::uint64_t>(config, "seed");
  throw ValidationError("config is missing required field 'seed' (or pass --seed)");
}

GeneratorConfig parse_generator(const json& doc) {
  GeneratorConfig cfg;
  cfg.n_devices = require_field<Index>(doc, "n_devices");
  cfg.n_apps = require_field<Index>(doc, "n_apps");
  cfg.target_edges = require_field<std::size_t>(doc, "target_edges");
  cfg.app_exponent = field_or(doc, "app_exponent", cfg.app_exponent);
  cfg.n_groups = field_or(doc, "n_groups", cfg.n_groups);
  cfg.affinity = field_or(doc, "affinity", cfg.affinity);
  cfg.mixing = field_or(doc, "mixing", cfg.mixing);
  cfg.device_log_mean = field_or(doc, "device_log_mean", cfg.device_log_mean);
  cfg.device_log_sigma = field_or(doc, "device_log_sigma", cfg.device_log_sigma);
  if (doc.contains("time_window")) {
    const auto& w = doc.at("time_window");
    if (!w.is_array() || w.size() != 2)
      throw ValidationError("config field 'time_window' must be [start, end]");
    cfg.t_start = w[0].get<std::int64_t>();
    cfg.t_end = w[1].get<std::int64_t>();
  }
  return cfg;
}

TrainerConfig parse_trainer(const json& doc, int workers) {
  TrainerConfig cfg;
  cfg.dim = field_or(doc, "dim", cfg.dim);
  cfg.max_order = field_or(doc, "max_order", cfg.max_order);
  cfg.walk_length = field_or(doc, "walk_length", cfg.walk_length);
  cfg.walk_length_in_vertices =
      field_or(doc, "walk_length_in_vertices", cfg.walk_length_in_vertices);
  cfg.walks_per_vertex = field_or(doc, "walks_per_vertex", cfg.walks_per_vertex);
  cfg.neg_samples = field_or(doc, "neg_samples", cfg.neg_samples);
  cfg.margin_epsilon = field_or(doc, "margin_epsilon", cfg.margin_epsilon);
  cfg.margin_k = field_or(doc, "margin_k", cfg.margin_k);
  cfg.reg_lambda = field_or(doc, "reg_lambda", cfg.reg_lambda);
  cfg.learning_rate = field_or(doc, "learning_rate", cfg.learning_rate);
  cfg.min_learning_rate = field_or(doc, "min_learning_rate", cfg.min_learning_rate);
  cfg.epochs = field_or(doc, "epochs", cfg.epochs);
  cfg.kernel = parse_walk_kernel(field_or<std::string>(doc, "kernel", "degree_weighted"));
  cfg.init_half_range = field_or(doc, "init_half_range", cfg.init_half_range);
  cfg.init_nonnegative = field_or(doc, "init_nonnegative", cfg.init_nonnegative);
  cfg.tail_average = field_or(doc, "tail_average", cfg.tail_average);
  cfg.workers = workers;
  return cfg;
}

BaselineConfig parse_baseline(const json& doc, int workers) {
  BaselineConfig cfg;
  cfg.dim = field_or(doc, "dim", cfg.dim);
  cfg.neg_samples = field_or(doc, "neg_samples", cfg.neg_samples);
  cfg.learning_rate = field_or(doc, "learning_rate", cfg.learning_rate);
  cfg.min_learning_rate = field_or(doc, "min_learning_rate", cfg.min_learning_rate);
  cfg.epochs = field_or(doc, "epochs", cfg.epochs);
  cfg.workers = workers;
  return cfg;
}

ClassifierParams parse_classifier_params(const json& doc) {
  ClassifierParams params;
  params.n_trees = field_or(doc, "n_trees", params.n_trees);
  params.boosting_rounds = field_or(doc, "boosting_rounds", params.boosting_rounds);
  params.boosting_depth = field_or(doc, "boosting_depth", params.boosting_depth);
  params.boosting_shrinkage = field_or(doc, "boosting_shrinkage", params.boosting_shrinkage);
  params.logistic_iterations = field_or(doc, "logistic_iterations", params.logistic_iterations);
  params.logistic_ridge = field_or(doc, "logistic_ridge", params.logistic_ridge);
  return params;
}

json generator_echo(const GeneratorConfig& g) {
  return {{"n_devices", g.n_devices},
          {"n_apps", g.n_apps},
          {"target_edges", g.target_edges},
          {"app_exponent", g.app_exponent},
          {"n_groups", g.n_groups},
          {"affinity", g.affinity},
          {"mixing", g.mixing},
          {"device_log_mean", g.device_log_mean},
          {"device_log_sigma", g.device_log_sigma},
          {"time_window", {g.t_start, g.t_end}},
          {"seed", g.seed}};
}

json trainer_echo(const TrainerConfig& t) {
  return {{"dim", t.dim},
          {"max_order", t.max_order},
          {"walk_length", t.walk_length},
          {"walk_length_in_vertices", t.walk_length_in_vertices},
          {"walks_per_vertex", t.walks_per_vertex},
          {"neg_samples", t.neg_samples},
          {"margin_epsilon", t.margin_epsilon},
          {"margin_k", t.effective_margin_k()},
          {"reg_lambda", t.reg_lambda},
          {"learning_rate", t.learning_rate},
          {"min_learning_rate", t.min_learning_rate},
          {"epochs", t.epochs},
          {"workers", t.workers},
          {"kernel", t.kernel == WalkKernel::DegreeWeighted ? "degree_weighted" : "uniform"},
          {"init_half_range", t.init_half_range},
          {"init_nonnegative", t.init_nonnegative},
          {"tail_average", t.tail_average},
          {"seed", t.seed}};
}

void write_run_echo(const fs::path& out_dir, const std::string& command, const json& resolved,
                    const std::vector<std::pair<std::string, std::string>>& input_files) {
  json doc{{"format_version", "1"}, {"command", command}, {"config", resolved}};
  json inputs = json::object();
  for (const auto& [name, path] : input_files) inputs[name] = hash_hex(hash_file(path));
  doc["input_hashes"] = inputs;
  std::ofstream out(out_dir / "run.json");
  if (!out) throw IoError("cannot write run.json");
  out << doc.dump(2) << '\n';
}

MethodsConfig parse_methods(const json& config, const GlobalOpts& opts, std::uint64_t seed) {
  MethodsConfig methods;
  methods.trainer = parse_trainer(field_or(config, "trainer", json::object()), opts.workers);
  methods.trainer.seed = seed;
  methods.baseline = parse_baseline(field_or(config, "baseline", json::object()), opts.workers);
  methods.baseline.seed = seed;
  const json clf = field_or(config, "classifier", json::object());
  methods.classifier = parse_classifier_kind(field_or<std::string>(clf, "kind", "tree_ensemble"));
  methods.classifier_params = parse_classifier_params(clf);
  methods.combiner = parse_combiner(field_or<std::string>(config, "combiner", "concat"));
  return methods;
}

// ---------------------------------------------------------------------------

int cmd_generate(const GlobalOpts& opts) {
  const json config = load_config(opts.config_path);
  if (!config.contains("generator"))
    throw ValidationError("config is missing required field 'generator'");
  GeneratorConfig gen = parse_generator(config.at("generator"));
  if (opts.seed) {
    gen.seed = *opts.seed;
  } else if (config.at("generator").contains("seed")) {
    gen.seed = require_field<std::uint64_t>(config.at("generator"), "seed");
  } else {
    throw ValidationError("config is missing required field 'seed' (or pass --seed)");
  }
  const double holdout = field_or(config, "holdout_fraction", 0.0);
  const EventFormat fmt = parse_event_format(opts.format);

  prepare_output_dir(opts.out_dir, opts.overwrite);
  const fs::path out(opts.out_dir);

  SyntheticData data = generate(gen);
  const std::string ext = fmt == EventFormat::Csv ? "csv" : "jsonl";
  if (holdout > 0.0) {
    auto split = holdout_future_edges(data.truth, holdout, derive_seed(gen.seed, 0x686f));
    write_events_file((out / ("events." + ext)).string(), split.visible, fmt);
    write_events_file((out / ("future_events." + ext)).string(), split.future, fmt);
    std::cout << "wrote " << split.visible.size() << " visible and " << split.future.size()
              << " future events\n";
  } else {
    write_events_file((out / ("events." + ext)).string(), data.events, fmt);
    std::cout << "wrote " << data.events.size() << " events\n";
  }
  write_ground_truth((out / "groundtruth.json").string(), data.truth);

  json resolved{{"generator", generator_echo(gen)}, {"holdout_fraction", holdout},
                {"format", ext}};
  write_run_echo(out, "generate", resolved, {});
  return 0;
}

int cmd_build_graph(const GlobalOpts& opts, const std::string& events_path, bool header,
                    bool strict, bool with_stats) {
  IngestOptions ingest_opts;
  ingest_opts.format = parse_event_format(opts.format);
  ingest_opts.skip_header = header;
  ingest_opts.strict = strict;
  auto ingested = ingest_events_file(events_path, ingest_opts);
  if (ingested.malformed_lines > 0)
    std::cerr << "warning: " << ingested.malformed_lines << " malformed lines (first at line "
              << ingested.first_malformed_line << ": " << ingested.first_malformed_reason << ")\n";

  auto graph = build_graph(ingested.events);
  prepare_output_dir(opts.out_dir, opts.overwrite);
  const fs::path out(opts.out_dir);
  write_graph_snapshot(out / "graph", graph);
  std::cout << "graph: " << graph.n_devices() << " devices, " << graph.n_apps() << " apps, "
            << graph.n_edges() << " edges\n";

  json resolved{{"events", events_path}, {"format", opts.format}, {"strict", strict}};
  if (with_stats) {
    json stats;
    for (auto [side, name] : {std::pair{Side::Device, "device"}, {Side::App, "app"}}) {
      auto hist = degree_histogram(graph, side);
      json hist_json = json::object();
      for (const auto& [deg, count] : hist.counts) hist_json[std::to_string(deg)] = count;
      stats[std::string(name) + "_degrees"] = {{"histogram", hist_json},
                                               {"power_law_alpha", hist.alpha},
                                               {"x_min", hist.x_min},
                                               {"ks_distance", hist.ks_distance},
                                               {"reliable", hist.reliable}};
    }
    const std::uint64_t stats_seed = opts.seed ? *opts.seed : 1;
    for (int hops : {2, 4}) {
      try {
        stats["khop_correlation"][std::to_string(hops)] =
            khop_degree_correlation(graph, hops, 10000, stats_seed);
      } catch (const ComputeError& e) {
        stats["khop_correlation"][std::to_string(hops)] = nullptr;
        stats["khop_correlation"][std::to_string(hops) + "_error"] = e.what();
      }
    }
    std::ofstream sf(out / "stats.json");
    sf << stats.dump(2) << '\n';
    std::cout << "stats written to stats.json\n";
  }
  write_run_echo(out, "build-graph", resolved, {{"events", events_path}});
  return 0;
}

int cmd_train(const GlobalOpts& opts, const std::string& events_path,
              const std::string& combiner_flag, const std::string& classifier_flag, bool header,
              bool strict) {
  const json config = opts.config_path.empty() ? json::object() : load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);

  IngestOptions ingest_opts;
  ingest_opts.format = parse_event_format(opts.format);
  ingest_opts.skip_header = header;
  ingest_opts.strict = strict;
  auto ingested = ingest_events_file(events_path, ingest_opts);
  const auto& events = ingested.events;
  if (events.empty()) throw ValidationError("event file is empty");

  // Temporal split: explicit boundary/horizon, or a train-fraction quantile.
  const json split_cfg = field_or(config, "split", json::object());
  std::int64_t boundary, horizon;
  if (split_cfg.contains("boundary")) {
    boundary = require_field<std::int64_t>(split_cfg, "boundary");
    horizon = require_field<std::int64_t>(split_cfg, "horizon");
  } else {
    const double fraction = field_or(split_cfg, "train_fraction", 0.8);
    if (!(fraction > 0.0 && fraction < 1.0))
      throw ValidationError("config field 'train_fraction' must lie in (0, 1)");
    std::vector<std::int64_t> times;
    times.reserve(events.size());
    for (const auto& ev : events) times.push_back(ev.timestamp);
    std::sort(times.begin(), times.end());
    boundary = times[static_cast<std::size_t>(fraction * (times.size() - 1))];
    horizon = times.back() - boundary;
    if (horizon <= 0) throw ValidationError("no events fall after the split boundary");
  }
  auto split = temporal_split(events, boundary, horizon);
  auto graph = build_graph(split_edges_to_events(split.train_edges));

  TrainerConfig trainer = parse_trainer(field_or(config, "trainer", json::object()), opts.workers);
  trainer.seed = derive_seed(seed, 0x656d62);
  for (const auto& warning : trainer.validate()) std::cerr << "warning: " << warning << "\n";

  const Combiner combiner = parse_combiner(
      combiner_flag.empty() ? field_or<std::string>(config, "combiner", "concat") : combiner_flag);
  const json clf_cfg = field_or(config, "classifier", json::object());
  const ClassifierKind clf_kind = parse_classifier_kind(
      classifier_flag.empty() ? field_or<std::string>(clf_cfg, "kind", "tree_ensemble")
                              : classifier_flag);
  const ClassifierParams clf_params = parse_classifier_params(clf_cfg);
  const ColdPolicy cold = parse_cold_policy(field_or<std::string>(config, "cold_policy", "drop"));

  prepare_output_dir(opts.out_dir, opts.overwrite);
  const fs::path out(opts.out_dir);

  std::cout << "train graph: " << graph.n_devices() << " devices, " << graph.n_apps()
            << " apps, " << graph.n_edges() << " edges; test edges: " << split.test_edges.size()
            << " (" << split.cold_test_edges << " cold)\n";

  const auto t0 = std::chrono::steady_clock::now();
  Embedding phi = train_embedding(graph, trainer);
  const double embed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "embedding trained in " << embed_sec << " s\n";

  auto datasets = build_datasets(phi, split, graph, combiner, cold, derive_seed(seed, 0x647374));
  auto model = train_classifier(datasets.train, clf_kind, derive_seed(seed, 0x636c66), clf_params);

  Vec test_scores = predict_scores(*model, datasets.test);
  std::vector<char> labels;
  for (const auto& e : datasets.test.entries) labels.push_back(e.positive ? 1 : 0);
  auto report = roc_and_metrics(test_scores, labels);
  report.method = "full";
  report.seed = seed;
  std::cout << "test AUC " << report.auc << ", AP " << report.ap << ", TPR@0.001 "
            << report.tpr_at.at(0.001).tpr << "\n";

  write_graph_snapshot(out / "graph", graph);
  write_embeddings(out, phi, graph, trainer_echo(trainer));
  write_model(out, *model, combiner,
              json{{"graph_hash", hash_hex(graph.content_hash())},
                   {"embedding_graph_hash", hash_hex(phi.graph_hash)},
                   {"cold_policy", cold_policy_name(cold)}});
  write_labeled_set(out, "train", datasets.train, graph);
  write_labeled_set(out, "test", datasets.test, graph);
  write_report_json(out / "report.json", {report}, json{{"kind", "train"}});
  write_roc_csv(out / "roc.csv", report);

  json resolved{{"seed", seed},
                {"workers", opts.workers},
                {"split", {{"boundary", boundary}, {"horizon", horizon}}},
                {"trainer", trainer_echo(trainer)},
                {"combiner", combiner_name(combiner)},
                {"classifier",
                 {{"kind", classifier_kind_name(clf_kind)}, {"n_trees", clf_params.n_trees}}},
                {"cold_policy", cold_policy_name(cold)},
                {"cold_dropped", datasets.test.cold_dropped}};
  write_run_echo(out, "train", resolved, {{"events", events_path}});
  return 0;
}

int cmd_predict(const GlobalOpts& opts, const std::string& artifacts_dir,
                const std::string& candidates_path) {
  const fs::path art(artifacts_dir);
  auto graph = read_graph_snapshot(art / "graph");
  auto phi = read_embeddings(art, graph);
  auto loaded = read_model(art);
  const ColdPolicy cold = parse_cold_policy(loaded.meta.value("cold_policy", std::string("drop")));

  std::ifstream in(candidates_path);
  if (!in) throw IoError("cannot open candidates file: " + candidates_path);
  struct Candidate {
    std::string device, app;
    Index d, m;
    bool cold;
  };
  std::vector<Candidate> candidates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("candidates line " + std::to_string(line_no) + ": expected device,app");
    Candidate c;
    c.device = line.substr(0, comma);
    c.app = line.substr(comma + 1);
    c.d = graph.find_device(c.device);
    c.m = graph.find_app(c.app);
    c.cold = c.d == graph.n_devices() || c.m == graph.n_apps();
    candidates.push_back(std::move(c));
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!opts.out_dir.empty()) {
    prepare_output_dir(opts.out_dir, opts.overwrite);
    out_file.open(fs::path(opts.out_dir) / "scores.csv");
    if (!out_file) throw IoError("cannot write scores.csv");
    out = &out_file;
  }
  (*out) << "device,app,status,score\n";
  const RowVec zero = RowVec::Zero(phi.dim());
  for (const auto& c : candidates) {
    if (c.cold && cold == ColdPolicy::Drop) {
      (*out) << c.device << ',' << c.app << ",cold_skipped,\n";
      continue;
    }
    RowVec features;
    if (!c.cold) {
      features = featurize_edge(phi, c.d, c.m, loaded.combiner);
    } else {
      auto dv = c.d == graph.n_devices() ? zero : RowVec(phi.device_vec(c.d));
      auto mv = c.m == graph.n_apps() ? zero : RowVec(phi.app_vec(c.m));
      features = combine_vectors(dv, mv, loaded.combiner);
    }
    (*out) << c.device << ',' << c.app << ",scored," << loaded.model->score_row(features) << '\n';
  }
  return 0;
}

int cmd_experiment(const GlobalOpts& opts, const std::string& kind) {
  if (kind != "comparison" && kind != "latency" && kind != "rolling" && kind != "runtime")
    throw ValidationError("unknown experiment kind '" + kind +
                          "' (expected comparison, latency, rolling or runtime)");
  const json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  prepare_output_dir(opts.out_dir, opts.overwrite);
  const fs::path out(opts.out_dir);

  MethodsConfig methods = parse_methods(config, opts, seed);

  ExperimentDataConfig data_cfg;
  if (kind != "rolling") {
    if (!config.contains("data"))
      throw ValidationError("config is missing required field 'data'");
    data_cfg.generator = parse_generator(config.at("data").at("generator"));
    data_cfg.holdout_fraction = field_or(config.at("data"), "holdout_fraction", 0.1);
  }

  if (kind == "comparison") {
    const auto method_names =
        field_or<std::vector<std::string>>(config, "methods", kComparisonMethods);
    auto results = comparison_experiment(data_cfg, method_names, methods, seed);
    std::vector<EvalReport> reports;
    json failures = json::array();
    for (auto& r : results) {
      if (r.report) {
        std::cout << r.method << ": AUC " << r.report->auc << ", TPR@0.001 "
                  << r.report->tpr_at.at(0.001).tpr << "\n";
        write_roc_csv(out / ("roc_" + r.method + ".csv"), *r.report);
        reports.push_back(std::move(*r.report));
      } else {
        std::cout << r.method << ": FAILED (" << r.error << ")\n";
        failures.push_back({{"method", r.method}, {"error", r.error}});
      }
    }
    write_report_json(out / "report.json", reports,
                      json{{"kind", "comparison"}, {"seed", seed}, {"failures", failures}});
  } else if (kind == "latency") {
    auto ratios = field_or<std::vector<double>>(config, "drop_ratios", {0.07, 0.16, 0.25});
    if (std::find(ratios.begin(), ratios.end(), 0.0) == ratios.end())
      ratios.insert(ratios.begin(), 0.0);
    auto rows = latency_experiment(data_cfg, ratios, methods, seed);
    std::vector<EvalReport> reports;
    for (auto& row : rows) {
      std::cout << "drop " << row.drop_ratio << ": AUC " << row.report.auc << "\n";
      row.report.method = "full@drop=" + std::to_string(row.drop_ratio);
      reports.push_back(std::move(row.report));
    }
    write_report_json(out / "report.json", reports,
                      json{{"kind", "latency"}, {"seed", seed}, {"drop_ratios", ratios}});
  } else if (kind == "rolling") {
    if (!config.contains("events"))
      throw ValidationError("config is missing required field 'events' (path to an event file)");
    const std::string events_path = config.at("events").get<std::string>();
    IngestOptions ingest_opts;
    ingest_opts.format = parse_event_format(field_or<std::string>(config, "format", "csv"));
    auto events = ingest_events_file(events_path, ingest_opts).events;
    const json roll = field_or(config, "rolling", json::object());
    const auto train_window = require_field<std::int64_t>(roll, "train_window");
    const auto test_window = require_field<std::int64_t>(roll, "test_window");
    const int steps = require_field<int>(roll, "steps");
    auto summary =
        rolling_window_experiment(events, train_window, test_window, steps, methods, seed);
    write_rolling_csv(out / "rolling.csv", summary);
    std::vector<EvalReport> reports;
    for (auto& step : summary.steps)
      if (step.report) reports.push_back(std::move(*step.report));
    json meta{{"kind", "rolling"},
              {"seed", seed},
              {"auc_mean", summary.auc_mean},
              {"auc_stddev", summary.auc_stddev}};
    for (const auto& [target, mean] : summary.tpr_mean) {
      meta["tpr_mean"][std::to_string(target)] = mean;
      meta["tpr_stddev"][std::to_string(target)] = summary.tpr_stddev.at(target);
    }
    write_report_json(out / "report.json", reports, meta);
    std::cout << "rolling mean AUC " << summary.auc_mean << " (stddev " << summary.auc_stddev
              << ") over " << reports.size() << " steps\n";
  } else if (kind == "runtime") {
    const auto multipliers =
        field_or<std::vector<double>>(config, "scale_multipliers", {1.0, 2.0, 4.0});
    auto rows = runtime_experiment(data_cfg, multipliers, methods, seed);
    json table = json::array();
    for (const auto& row : rows) {
      std::cout << row.label << ": " << row.n_edges << " edges; graph " << row.graph_sec
                << " s, embedding " << row.embed_sec << " s, classifier " << row.classifier_sec
                << " s\n";
      table.push_back({{"label", row.label},
                       {"n_events", row.n_events},
                       {"n_edges", row.n_edges},
                       {"graph_sec", row.graph_sec},
                       {"embed_sec", row.embed_sec},
                       {"classifier_sec", row.classifier_sec},
                       {"edge_ratio", row.edge_ratio},
                       {"embed_ratio", row.embed_ratio}});
    }
    std::ofstream rf(out / "report.json");
    rf << json{{"format_version", "1"},
               {"experiment", {{"kind", "runtime"}, {"seed", seed}}},
               {"scaling", table}}
              .dump(2)
       << '\n';
  } else {
    throw ValidationError("unknown experiment kind '" + kind +
                          "' (expected comparison, latency, rolling or runtime)");
  }

  write_run_echo(out, "experiment " + kind, config, {{"config", opts.config_path}});
  return 0;
}

int cmd_explain(const GlobalOpts& opts, const std::string& artifacts_dir,
                const std::string& device_token, const std::string& app_token, std::size_t budget,
                bool as_json) {
  const fs::path art(artifacts_dir);
  auto graph = read_graph_snapshot(art / "graph");
  auto phi = read_embeddings(art, graph);
  auto loaded = read_model(art);

  const Index d = graph.find_device(device_token);
  if (d == graph.n_devices()) throw ValidationError("unknown device token '" + device_token + "'");
  const Index m = graph.find_app(app_token);
  if (m == graph.n_apps()) throw ValidationError("unknown app token '" + app_token + "'");

  const std::uint64_t seed = opts.seed ? *opts.seed : 1;
  auto traces = explain_prediction(graph, d, m, budget, 4, seed);
  const double score = loaded.model->score_row(featurize_edge(phi, d, m, loaded.combiner));

  if (as_json) {
    json doc{{"format_version", "1"},
             {"device", device_token},
             {"app", app_token},
             {"score", score},
             {"walk_budget", budget}};
    json walks = json::array();
    for (const auto& t : traces) {
      json path = json::array();
      for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        path.push_back(i % 2 == 0 ? graph.device_token(t.vertices[i])
                                  : graph.app_token(t.vertices[i]));
      }
      walks.push_back({{"path", path}, {"order", t.order}, {"hits", t.hits}});
    }
    doc["walks"] = walks;
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "score(" << device_token << ", " << app_token << ") = " << score << "\n";
    if (traces.empty()) {
      std::cout << "no connecting walks within budget " << budget << "\n";
    } else {
      for (const auto& t : traces) {
        std::cout << "hits=" << t.hits << " order=" << t.order << " path:";
        for (std::size_t i = 0; i < t.vertices.size(); ++i)
          std::cout << ' '
                    << (i % 2 == 0 ? graph.device_token(t.vertices[i])
                                   : graph.app_token(t.vertices[i]));
        std::cout << "\n";
      }
    }
  }
  return 0;
}

int cmd_export(const GlobalOpts& opts, const std::string& what, const std::string& input,
               const std::string& from_format, const std::string& candidates_path) {
  if (what == "events") {
    IngestOptions ingest_opts;
    ingest_opts.format = parse_event_format(from_format);
    auto events = ingest_events_file(input, ingest_opts).events;
    prepare_output_dir(opts.out_dir, opts.overwrite);
    const EventFormat to = parse_event_format(opts.format);
    const std::string ext = to == EventFormat::Csv ? "csv" : "jsonl";
    write_events_file((fs::path(opts.out_dir) / ("events." + ext)).string(), events, to);
    std::cout << "exported " << events.size() << " events\n";
    return 0;
  }
  if (what == "pa-scores") {
    auto graph = read_graph_snapshot(fs::path(input) / "graph");
    if (candidates_path.empty())
      throw ValidationError("export pa-scores requires --candidates");
    std::ifstream in(candidates_path);
    if (!in) throw IoError("cannot open candidates file: " + candidates_path);
    prepare_output_dir(opts.out_dir, opts.overwrite);
    std::ofstream out_file(fs::path(opts.out_dir) / "pa_scores.csv");
    out_file << "device,app,score\n";
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ParseError("candidates: expected device,app");
      const std::string dev = line.substr(0, comma), app = line.substr(comma + 1);
      const Index d = graph.find_device(dev);
      const Index m = graph.find_app(app);
      if (d == graph.n_devices() || m == graph.n_apps()) {
        out_file << dev << ',' << app << ",\n";
        continue;
      }
      out_file << dev << ',' << app << ',' << pa_score(graph, d, m) << '\n';
    }
    return 0;
  }
  throw ValidationError("unknown export target '" + what + "' (expected events or pa-scores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bipartite installation-graph link prediction toolkit"};
  app.require_subcommand(1);

  GlobalOpts opts;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("-c,--config", opts.config_path, "JSON config file");
    auto* out_opt = sub->add_option("-o,--out", opts.out_dir, "output directory");
    if (needs_out) out_opt->required();
    sub->add_option("--seed", seed_value, "root seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--workers", opts.workers, "parallelism degree")->check(CLI::PositiveNumber);
    sub->add_flag("--overwrite", opts.overwrite, "replace existing outputs");
    sub->add_option("--format", opts.format, "event file format (csv or jsonl)")
        ->check(CLI::IsMember({"csv", "jsonl"}));
  };

  auto* gen = app.add_subcommand("generate", "generate a synthetic event corpus");
  add_common(gen, true);

  std::string events_path;
  bool header = false, strict = false, with_stats = true;
  auto* bg = app.add_subcommand("build-graph", "build a graph snapshot from events");
  bg->add_option("events", events_path, "event file")->required();
  bg->add_flag("--header", header, "skip one CSV header line");
  bg->add_flag("--strict", strict, "fail on the first malformed line");
  bg->add_flag("!--no-stats", with_stats, "skip degree statistics");
  add_common(bg, true);

  std::string combiner_flag, classifier_flag;
  auto* tr = app.add_subcommand("train", "train embeddings and the prediction model");
  tr->add_option("events", events_path, "event file")->required();
  tr->add_option("--combiner", combiner_flag, "edge feature combiner")
      ->check(CLI::IsMember({"concat", "average", "hadamard", "weighted_l1", "weighted_l2"}));
  tr->add_option("--classifier", classifier_flag, "prediction model kind")
      ->check(CLI::IsMember({"tree_ensemble", "logistic", "gradient_boosting"}));
  tr->add_flag("--header", header, "skip one CSV header line");
  tr->add_flag("--strict", strict, "fail on the first malformed line");
  add_common(tr, true);

  std::string artifacts_dir, candidates_path;
  auto* pr = app.add_subcommand("predict", "score candidate edges with trained artifacts");
  pr->add_option("artifacts", artifacts_dir, "artifacts directory from `train`")->required();
  pr->add_option("candidates", candidates_path, "CSV of device,app pairs")->required();
  add_common(pr, false);

  std::string experiment_kind;
  auto* ex = app.add_subcommand("experiment", "run an evaluation experiment");
  ex->add_option("kind", experiment_kind, "comparison | latency | rolling | runtime")->required();
  add_common(ex, true);

  std::string device_token, app_token;
  std::size_t walk_budget = 20000;
  bool explain_json = false;
  auto* epl = app.add_subcommand("explain", "show the walks behind a prediction");
  epl->add_option("artifacts", artifacts_dir, "artifacts directory from `train`")->required();
  epl->add_option("device", device_token, "device token")->required();
  epl->add_option("app", app_token, "app token")->required();
  epl->add_option("--budget", walk_budget, "walk sampling budget");
  epl->add_flag("--json", explain_json, "emit JSON");
  add_common(epl, false);

  std::string export_what, export_input, export_from = "csv";
  auto* px = app.add_subcommand("export", "convert artifacts between formats");
  px->add_option("what", export_what, "events | pa-scores")->required();
  px->add_option("input", export_input, "input file or artifacts directory")->required();
  px->add_option("--from", export_from, "input event format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  px->add_option("--candidates", candidates_path, "CSV of device,app pairs (pa-scores)");
  add_common(px, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // validation
  }
  if (seed_set) opts.seed = seed_value;

  try {
    if (gen->parsed()) return cmd_generate(opts);
    if (bg->parsed()) return cmd_build_graph(opts, events_path, header, strict, with_stats);
    if (tr->parsed())
      return cmd_train(opts, events_path, combiner_flag, classifier_flag, header, strict);
    if (pr->parsed()) return cmd_predict(opts, artifacts_dir, candidates_path);
    if (ex->parsed()) return cmd_experiment(opts, experiment_kind);
    if (epl->parsed())
      return cmd_explain(opts, artifacts_dir, device_token, app_token, walk_budget, explain_json);
    if (px->parsed())
      return cmd_export(opts, export_what, export_input, export_from, candidates_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
