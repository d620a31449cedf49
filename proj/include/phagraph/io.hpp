#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "phagraph/classifier.hpp"
#include "phagraph/common.hpp"
#include "phagraph/dataset.hpp"
#include "phagraph/experiments.hpp"
#include "phagraph/graph.hpp"
#include "phagraph/metrics.hpp"
#include "phagraph/trainer.hpp"

namespace phagraph {

namespace fs = std::filesystem;

// Graph snapshot directory: devices.tsv / apps.tsv (token <tab> index),
// edges.bin (little-endian u32 pairs, device index then app index),
// meta.json (window, counts, format_version "1").
void write_graph_snapshot(const fs::path& dir, const BipartiteGraph& graph);
BipartiteGraph read_graph_snapshot(const fs::path& dir);

// embeddings.tsv: one row per vertex, `side <tab> token <tab> v1 .. vd`
// (side D or M, components space-separated), devices first. The sidecar
// embeddings.meta.json records dim, max order, a config echo and the train
// graph's snapshot hash.
void write_embeddings(const fs::path& dir, const Embedding& phi, const BipartiteGraph& graph,
                      const nlohmann::json& config_echo);
Embedding read_embeddings(const fs::path& dir, const BipartiteGraph& graph);

// Model blob (model.json) plus model.meta.json with kind, seed, combiner,
// feature dim and training hashes.
void write_model(const fs::path& dir, const Classifier& model, Combiner combiner,
                 const nlohmann::json& extra_meta);
struct LoadedModel {
  std::unique_ptr<Classifier> model;
  Combiner combiner = Combiner::Concat;
  nlohmann::json meta;
};
LoadedModel read_model(const fs::path& dir);

// edges_{train,test}.csv (device,app,label) with a features sidecar in the
// embedding TSV convention.
void write_labeled_set(const fs::path& dir, const std::string& name, const LabeledEdgeSet& set,
                       const BipartiteGraph& graph);

void write_report_json(const fs::path& path, const std::vector<EvalReport>& reports,
                       const nlohmann::json& experiment_meta);
void write_roc_csv(const fs::path& path, const EvalReport& report);
void write_rolling_csv(const fs::path& path, const RollingSummary& summary);

nlohmann::json report_to_json(const EvalReport& report);

// Refuses to reuse an existing non-empty output directory unless
// `overwrite`; creates it when missing.
void prepare_output_dir(const fs::path& dir, bool overwrite);

void write_text_file(const fs::path& path, const std::string& content);

}  // namespace phagraph
