#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phagraph/experiments.hpp"
#include "test_util.hpp"

using namespace phagraph;
using namespace phagraph::test;

namespace {

ExperimentDataConfig small_data() {
  ExperimentDataConfig cfg;
  cfg.generator.n_devices = 300;
  cfg.generator.n_apps = 60;
  cfg.generator.target_edges = 1500;
  cfg.generator.n_groups = 6;
  cfg.generator.affinity = 8.0;
  cfg.generator.mixing = 0.8;
  cfg.holdout_fraction = 0.1;
  return cfg;
}

MethodsConfig small_methods() {
  MethodsConfig m;
  m.trainer.dim = 16;
  m.trainer.walks_per_vertex = 10;
  m.trainer.neg_samples = 10;
  m.trainer.workers = 2;
  m.baseline.dim = 16;
  m.baseline.epochs = 10;
  m.baseline.workers = 2;
  m.classifier_params.n_trees = 10;
  return m;
}

}  // namespace

TEST_CASE("prepared datasets share candidates and stay balanced") {
  auto data = prepare_synthetic_dataset(small_data(), 5);
  CHECK(data.test_pos.size() == data.test_neg.size());
  CHECK(data.train_neg.size() == data.graph.n_edges());
  EdgeKeySet seen;
  for (const auto& [d, m] : data.test_pos) {
    CHECK(data.graph.has_edge(d, m) == false);
    seen.insert(edge_key(d, m));
  }
  for (const auto& [d, m] : data.test_neg) {
    CHECK(!data.graph.has_edge(d, m));
    CHECK(seen.insert(edge_key(d, m)).second);  // disjoint from positives
  }
  for (const auto& [d, m] : data.train_neg) CHECK(!data.graph.has_edge(d, m));

  auto again = prepare_synthetic_dataset(small_data(), 5);
  CHECK(again.test_pos == data.test_pos);
  CHECK(again.test_neg == data.test_neg);
}

TEST_CASE("single-method comparison yields a table of one") {
  auto results = comparison_experiment(small_data(), {"pa"}, small_methods(), 3);
  REQUIRE(results.size() == 1);
  CHECK(results[0].method == "pa");
  REQUIRE(results[0].report.has_value());
  CHECK(results[0].report->auc > 0.0);
  CHECK(results[0].error.empty());
}

TEST_CASE("unknown method is annotated as a failure, not fatal") {
  auto results = comparison_experiment(small_data(), {"pa", "nonsense"}, small_methods(), 3);
  REQUIRE(results.size() == 2);
  CHECK(results[0].report.has_value());
  CHECK_FALSE(results[1].report.has_value());
  CHECK(!results[1].error.empty());
}

TEST_CASE("comparison runs the full stack and beats chance on planted data") {
  auto results = comparison_experiment(small_data(), {"full"}, small_methods(), 11);
  REQUIRE(results[0].report.has_value());
  CHECK(results[0].report->auc > 0.6);
  CHECK(results[0].report->timings_sec.count("embedding"));
  CHECK(results[0].report->timings_sec.count("classifier"));
}

TEST_CASE("latency experiment fixes the test set across ratios") {
  auto rows = latency_experiment(small_data(), {0.0, 0.07, 0.16, 0.25}, small_methods(), 7);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].drop_ratio == 0.0);
  const double pos0 = rows[0].report.counts.at("test_positives");
  for (const auto& row : rows) {
    CHECK(row.report.counts.at("test_positives") == pos0);
    CHECK(row.report.counts.at("test_negatives") == pos0);
    CHECK(row.report.auc > 0.5);
  }
  // Heavier drops leave fewer training edges.
  CHECK(rows[3].report.counts.at("train_edges") < rows[0].report.counts.at("train_edges"));
}

TEST_CASE("latency experiment validates ratios") {
  CHECK_THROWS_AS(latency_experiment(small_data(), {1.2}, small_methods(), 1), ValidationError);
}

TEST_CASE("rolling window retrains per step and summarizes") {
  GeneratorConfig gen;
  gen.n_devices = 400;
  gen.n_apps = 60;
  gen.target_edges = 4000;
  gen.n_groups = 6;
  gen.affinity = 8.0;
  gen.t_start = 0;
  gen.t_end = 999;
  gen.seed = 13;
  auto data = generate(gen);

  auto summary = rolling_window_experiment(data.events, 600, 100, 3, small_methods(), 19);
  REQUIRE(summary.steps.size() == 3);
  int completed = 0;
  for (const auto& step : summary.steps)
    if (!step.skipped) ++completed;
  CHECK(completed == 3);
  CHECK(summary.auc_mean > 0.5);
  CHECK(summary.tpr_mean.size() == 3);

  // steps=1 degenerates to a single split evaluation.
  auto single = rolling_window_experiment(data.events, 600, 100, 1, small_methods(), 19);
  REQUIRE(single.steps.size() == 1);
  CHECK(single.auc_stddev == 0.0);
}

TEST_CASE("rolling window validates its span") {
  GeneratorConfig gen;
  gen.n_devices = 50;
  gen.n_apps = 10;
  gen.target_edges = 100;
  gen.t_start = 0;
  gen.t_end = 99;
  auto data = generate(gen);
  CHECK_THROWS_AS(rolling_window_experiment(data.events, 90, 20, 3, small_methods(), 1),
                  ValidationError);
}

TEST_CASE("runtime experiment reports per-stage timings and ratios") {
  ExperimentDataConfig cfg;
  cfg.generator.n_devices = 150;
  cfg.generator.n_apps = 40;
  cfg.generator.target_edges = 600;
  MethodsConfig m = small_methods();
  m.trainer.walks_per_vertex = 4;

  auto rows = runtime_experiment(cfg, {1.0, 2.0}, m, 23);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].edge_ratio == 0.0);
  CHECK(rows[1].edge_ratio > 1.0);
  CHECK(rows[1].n_edges > rows[0].n_edges);
  for (const auto& row : rows) {
    CHECK(row.graph_sec >= 0.0);
    CHECK(row.embed_sec > 0.0);
    CHECK(row.classifier_sec > 0.0);
  }
  CHECK_THROWS_AS(runtime_experiment(cfg, {1.0}, m, 1), ValidationError);
}
