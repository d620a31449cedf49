#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phagraph/baselines.hpp"
#include "phagraph/classifier.hpp"
#include "phagraph/common.hpp"
#include "phagraph/dataset.hpp"
#include "phagraph/metrics.hpp"
#include "phagraph/synthetic.hpp"
#include "phagraph/trainer.hpp"

namespace phagraph {

// Synthetic data source shared by the experiment harnesses.
struct ExperimentDataConfig {
  GeneratorConfig generator;
  double holdout_fraction = 0.1;
};

// Method stack shared by all experiments; per-run seeds are derived inside.
struct MethodsConfig {
  TrainerConfig trainer;
  BaselineConfig baseline;
  ClassifierKind classifier = ClassifierKind::TreeEnsemble;
  ClassifierParams classifier_params;
  Combiner combiner = Combiner::Concat;
  std::vector<double> fpr_targets = kDefaultFprTargets;
};

// Train graph plus the fixed candidate lists every method is scored on.
// Negatives are sampled once so methods receive byte-identical test material.
struct PreparedData {
  std::vector<InstallEvent> visible;
  std::vector<InstallEvent> future;
  BipartiteGraph graph;
  std::vector<std::pair<Index, Index>> test_pos;
  std::vector<std::pair<Index, Index>> test_neg;
  std::vector<std::pair<Index, Index>> train_neg;
  std::size_t cold_dropped = 0;
};

PreparedData prepare_synthetic_dataset(const ExperimentDataConfig& cfg, std::uint64_t seed);

inline const std::vector<std::string> kComparisonMethods{"pa", "first_order", "second_order",
                                                         "full"};

// "pa", "first_order", "second_order", "full", and "full_k1" (the primary
// trainer truncated to first-order pairs, the internal high-order ablation).
EvalReport evaluate_method(const std::string& method, const PreparedData& data,
                           const MethodsConfig& methods, std::uint64_t seed);

struct MethodResult {
  std::string method;
  std::optional<EvalReport> report;  // empty on failure
  std::string error;
};

// One report per method on identical train/test material (paired negatives).
std::vector<MethodResult> comparison_experiment(const ExperimentDataConfig& data_cfg,
                                                const std::vector<std::string>& methods,
                                                const MethodsConfig& methods_cfg,
                                                std::uint64_t seed);

struct LatencyRow {
  double drop_ratio;
  EvalReport report;
};

// Removes a fraction of training events (nested across ratios) before
// training the full model; the test candidate set is held fixed.
std::vector<LatencyRow> latency_experiment(const ExperimentDataConfig& data_cfg,
                                           const std::vector<double>& drop_ratios,
                                           const MethodsConfig& methods_cfg, std::uint64_t seed);

struct RollingStep {
  int step = 0;
  bool skipped = false;
  std::string skip_reason;
  std::optional<EvalReport> report;
};

struct RollingSummary {
  std::vector<RollingStep> steps;
  std::map<double, double> tpr_mean;  // per FPR target, over completed steps
  std::map<double, double> tpr_stddev;
  double auc_mean = 0.0;
  double auc_stddev = 0.0;
};

// Full retrain+evaluate cycle per rolling window: train on `train_window`
// seconds, test on the following `test_window`, advancing by `test_window`.
RollingSummary rolling_window_experiment(const std::vector<InstallEvent>& events,
                                         std::int64_t train_window, std::int64_t test_window,
                                         int steps, const MethodsConfig& methods_cfg,
                                         std::uint64_t seed);

struct RuntimeRow {
  std::string label;
  std::size_t n_events = 0;
  std::size_t n_edges = 0;
  double graph_sec = 0.0;
  double embed_sec = 0.0;
  double classifier_sec = 0.0;
  double edge_ratio = 0.0;   // vs previous row
  double embed_ratio = 0.0;  // vs previous row
};

// Wall-clock per stage across dataset scales (>= 2 rows for ratios).
std::vector<RuntimeRow> runtime_experiment(const ExperimentDataConfig& base,
                                           const std::vector<double>& scale_multipliers,
                                           const MethodsConfig& methods_cfg, std::uint64_t seed);

}  // namespace phagraph
