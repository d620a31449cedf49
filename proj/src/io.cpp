#include "phagraph/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "phagraph/hash.hpp"

namespace phagraph {

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

nlohmann::json load_json(const fs::path& path) {
  auto in = open_in(path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("invalid JSON in " + path.string());
  return doc;
}

void write_token_index_tsv(const fs::path& path, const BipartiteGraph& graph, Side side) {
  auto out = open_out(path);
  const Index n = side == Side::Device ? graph.n_devices() : graph.n_apps();
  for (Index i = 0; i < n; ++i) {
    const std::string& token =
        side == Side::Device ? graph.device_token(i) : graph.app_token(i);
    out << token << '\t' << i << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> read_token_index_tsv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path.string() + ": missing tab at line " + std::to_string(line_no));
    const std::size_t index = std::stoull(line.substr(tab + 1));
    if (index != tokens.size())
      throw ParseError(path.string() + ": non-dense index at line " + std::to_string(line_no));
    tokens.push_back(line.substr(0, tab));
  }
  return tokens;
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  char buf[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(buf, 4);
}

std::uint32_t get_u32_le(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw ParseError("truncated edges.bin");
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

}  // namespace

void write_graph_snapshot(const fs::path& dir, const BipartiteGraph& graph) {
  fs::create_directories(dir);
  write_token_index_tsv(dir / "devices.tsv", graph, Side::Device);
  write_token_index_tsv(dir / "apps.tsv", graph, Side::App);

  {
    auto out = open_out(dir / "edges.bin", std::ios::binary);
    for (const auto& e : graph.edges()) {
      put_u32_le(out, e.device);
      put_u32_le(out, e.app);
    }
    if (!out) throw IoError("failed writing edges.bin");
  }

  nlohmann::json meta{{"format_version", "1"},
                      {"window", {graph.window_start(), graph.window_end()}},
                      {"n_devices", graph.n_devices()},
                      {"n_apps", graph.n_apps()},
                      {"n_edges", graph.n_edges()},
                      {"content_hash", hash_hex(graph.content_hash())}};
  open_out(dir / "meta.json") << meta.dump(2) << '\n';
}

BipartiteGraph read_graph_snapshot(const fs::path& dir) {
  const nlohmann::json meta = load_json(dir / "meta.json");
  if (meta.at("format_version").get<std::string>() != "1")
    throw ParseError("unsupported snapshot format version");
  const auto devices = read_token_index_tsv(dir / "devices.tsv");
  const auto apps = read_token_index_tsv(dir / "apps.tsv");
  const std::int64_t w_start = meta.at("window")[0].get<std::int64_t>();
  const std::int64_t w_end = meta.at("window")[1].get<std::int64_t>();
  const std::size_t n_edges = meta.at("n_edges").get<std::size_t>();

  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(n_edges);
  auto in = open_in(dir / "edges.bin", std::ios::binary);
  for (std::size_t i = 0; i < n_edges; ++i) {
    const std::uint32_t d = get_u32_le(in);
    const std::uint32_t m = get_u32_le(in);
    pairs.emplace_back(d, m);
  }
  return BipartiteGraph::from_parts(devices, apps, std::move(pairs), w_start, w_end);
}

void write_embeddings(const fs::path& dir, const Embedding& phi, const BipartiteGraph& graph,
                      const nlohmann::json& config_echo) {
  if (phi.n_devices != graph.n_devices() || phi.n_apps() != graph.n_apps())
    throw ValidationError("embedding and graph vertex counts disagree");
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "embeddings.tsv");
    out << std::setprecision(17);
    for (Index d = 0; d < graph.n_devices(); ++d) {
      out << "D\t" << graph.device_token(d) << '\t';
      const Scalar* row = phi.device_row(d);
      for (int j = 0; j < phi.dim(); ++j) out << (j ? " " : "") << row[j];
      out << '\n';
    }
    for (Index m = 0; m < graph.n_apps(); ++m) {
      out << "M\t" << graph.app_token(m) << '\t';
      const Scalar* row = phi.app_row(m);
      for (int j = 0; j < phi.dim(); ++j) out << (j ? " " : "") << row[j];
      out << '\n';
    }
    if (!out) throw IoError("failed writing embeddings.tsv");
  }
  nlohmann::json meta{{"format_version", "1"},
                      {"dim", phi.dim()},
                      {"n_devices", phi.n_devices},
                      {"n_apps", phi.n_apps()},
                      {"graph_hash", hash_hex(phi.graph_hash)},
                      {"config", config_echo}};
  open_out(dir / "embeddings.meta.json") << meta.dump(2) << '\n';
}

Embedding read_embeddings(const fs::path& dir, const BipartiteGraph& graph) {
  const nlohmann::json meta = load_json(dir / "embeddings.meta.json");
  if (meta.at("format_version").get<std::string>() != "1")
    throw ParseError("unsupported embeddings format version");
  Embedding phi;
  phi.n_devices = meta.at("n_devices").get<Index>();
  const Index n_apps = meta.at("n_apps").get<Index>();
  const int dim = meta.at("dim").get<int>();
  phi.graph_hash = std::stoull(meta.at("graph_hash").get<std::string>(), nullptr, 16);
  if (phi.n_devices != graph.n_devices() || n_apps != graph.n_apps())
    throw ValidationError("embeddings were written for a different graph");
  phi.vectors.resize(static_cast<Eigen::Index>(phi.n_devices) + n_apps, dim);

  auto in = open_in(dir / "embeddings.tsv");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string side, token;
    if (!std::getline(ls, side, '\t') || !std::getline(ls, token, '\t'))
      throw ParseError("embeddings.tsv: bad row at line " + std::to_string(line_no));
    Eigen::Index row;
    if (side == "D") {
      const Index d = graph.find_device(token);
      if (d == graph.n_devices()) throw ParseError("embeddings.tsv: unknown device " + token);
      row = d;
    } else if (side == "M") {
      const Index m = graph.find_app(token);
      if (m == graph.n_apps()) throw ParseError("embeddings.tsv: unknown app " + token);
      row = static_cast<Eigen::Index>(phi.n_devices) + m;
    } else {
      throw ParseError("embeddings.tsv: side must be D or M at line " + std::to_string(line_no));
    }
    for (int j = 0; j < dim; ++j) {
      if (!(ls >> phi.vectors(row, j)))
        throw ParseError("embeddings.tsv: short vector at line " + std::to_string(line_no));
    }
  }
  return phi;
}

void write_model(const fs::path& dir, const Classifier& model, Combiner combiner,
                 const nlohmann::json& extra_meta) {
  fs::create_directories(dir);
  open_out(dir / "model.json") << model.to_json().dump() << '\n';
  nlohmann::json meta{{"format_version", "1"},
                      {"kind", classifier_kind_name(model.kind())},
                      {"seed", model.seed()},
                      {"combiner", combiner_name(combiner)},
                      {"feature_dim", model.n_features()}};
  for (auto& [key, value] : extra_meta.items()) meta[key] = value;
  open_out(dir / "model.meta.json") << meta.dump(2) << '\n';
}

LoadedModel read_model(const fs::path& dir) {
  LoadedModel loaded;
  loaded.model = Classifier::from_json(load_json(dir / "model.json"));
  loaded.meta = load_json(dir / "model.meta.json");
  loaded.combiner = parse_combiner(loaded.meta.at("combiner").get<std::string>());
  return loaded;
}

void write_labeled_set(const fs::path& dir, const std::string& name, const LabeledEdgeSet& set,
                       const BipartiteGraph& graph) {
  fs::create_directories(dir);
  auto token_of = [&](const LabeledEdge& e, bool device) {
    if (device)
      return e.device < graph.n_devices() ? graph.device_token(e.device) : std::string("<cold>");
    return e.app < graph.n_apps() ? graph.app_token(e.app) : std::string("<cold>");
  };
  {
    auto out = open_out(dir / ("edges_" + name + ".csv"));
    out << "device,app,label\n";
    for (const auto& e : set.entries)
      out << token_of(e, true) << ',' << token_of(e, false) << ',' << (e.positive ? 1 : 0) << '\n';
    if (!out) throw IoError("failed writing edges_" + name + ".csv");
  }
  {
    auto out = open_out(dir / ("features_" + name + ".tsv"));
    out << std::setprecision(17);
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
      const auto& e = set.entries[i];
      out << token_of(e, true) << '\t' << token_of(e, false) << '\t';
      for (Eigen::Index j = 0; j < set.features.cols(); ++j)
        out << (j ? " " : "") << set.features(static_cast<Eigen::Index>(i), j);
      out << '\n';
    }
    if (!out) throw IoError("failed writing features_" + name + ".tsv");
  }
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json tpr_at = nlohmann::json::object();
  for (const auto& [target, pt] : report.tpr_at) {
    std::ostringstream key;
    key << target;
    tpr_at[key.str()] = {{"tpr", pt.tpr}, {"fpr", pt.fpr},     {"threshold", pt.threshold},
                         {"tp", pt.tp},   {"fp", pt.fp},       {"tn", pt.tn},
                         {"fn", pt.fn}};
  }
  return {{"method", report.method}, {"auc", report.auc},
          {"ap", report.ap},         {"tpr_at", tpr_at},
          {"seed", report.seed},     {"timings_sec", report.timings_sec},
          {"counts", report.counts}, {"dataset_hash", report.dataset_hash}};
}

void write_report_json(const fs::path& path, const std::vector<EvalReport>& reports,
                       const nlohmann::json& experiment_meta) {
  nlohmann::json doc{{"format_version", "1"}, {"experiment", experiment_meta}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) rows.push_back(report_to_json(r));
  doc["reports"] = std::move(rows);
  open_out(path) << doc.dump(2) << '\n';
}

void write_roc_csv(const fs::path& path, const EvalReport& report) {
  auto out = open_out(path);
  out << "fpr,tpr\n" << std::setprecision(17);
  for (const auto& [fpr, tpr] : report.roc) out << fpr << ',' << tpr << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_rolling_csv(const fs::path& path, const RollingSummary& summary) {
  auto out = open_out(path);
  out << "step,skipped";
  std::vector<double> targets;
  for (const auto& step : summary.steps) {
    if (step.report) {
      for (const auto& [t, _] : step.report->tpr_at) targets.push_back(t);
      break;
    }
  }
  for (double t : targets) out << ",tpr_at_" << t;
  out << ",auc,ap\n" << std::setprecision(12);
  for (const auto& step : summary.steps) {
    out << step.step << ',' << (step.skipped ? 1 : 0);
    if (step.report) {
      for (double t : targets) out << ',' << step.report->tpr_at.at(t).tpr;
      out << ',' << step.report->auc << ',' << step.report->ap;
    } else {
      for (std::size_t i = 0; i < targets.size() + 2; ++i) out << ',';
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw IoError("output path exists and is not a directory: " + dir.string());
  if (fs::exists(dir) && !fs::is_empty(dir) && !overwrite)
    throw ValidationError("output directory " + dir.string() +
                          " is not empty; pass --overwrite to replace its contents");
  fs::create_directories(dir);
}

void write_text_file(const fs::path& path, const std::string& content) {
  open_out(path) << content;
}

std::string combiner_name(Combiner c) {
  switch (c) {
    case Combiner::Concat: return "concat";
    case Combiner::Average: return "average";
    case Combiner::Hadamard: return "hadamard";
    case Combiner::WeightedL1: return "weighted_l1";
    case Combiner::WeightedL2: return "weighted_l2";
  }
  return "unknown";
}

Combiner parse_combiner(const std::string& name) {
  if (name == "concat") return Combiner::Concat;
  if (name == "average") return Combiner::Average;
  if (name == "hadamard") return Combiner::Hadamard;
  if (name == "weighted_l1") return Combiner::WeightedL1;
  if (name == "weighted_l2") return Combiner::WeightedL2;
  throw ValidationError("unknown combiner '" + name +
                        "' (expected concat, average, hadamard, weighted_l1 or weighted_l2)");
}

}  // namespace phagraph
