#include "phagraph/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Cholesky>

#include "phagraph/rng.hpp"

namespace phagraph {

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "tree_ensemble") return ClassifierKind::TreeEnsemble;
  if (name == "logistic") return ClassifierKind::Logistic;
  if (name == "gradient_boosting") return ClassifierKind::GradientBoosting;
  throw ValidationError("unknown classifier kind '" + name +
                        "' (expected tree_ensemble, logistic or gradient_boosting)");
}

std::string classifier_kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::TreeEnsemble: return "tree_ensemble";
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::GradientBoosting: return "gradient_boosting";
  }
  return "unknown";
}

Vec Classifier::score(const Mat& features) const {
  Vec out(features.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = score_row(features.row(i));
  return out;
}

namespace {

inline double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// ---------------------------------------------------------------------------
// CART-style trees with gini splits, unlimited depth.

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: positive-class probability (or boosting weight)
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(Eigen::Ref<const RowVec> x) const {
    int at = 0;
    while (nodes[at].feature >= 0)
      at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes)
      arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return arr;
  }

  static Tree from_json(const nlohmann::json& arr) {
    Tree t;
    for (const auto& n : arr)
      t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                         n[4].get<double>()});
    return t;
  }
};

Tree build_cart_tree(const Mat& x, const std::vector<char>& y, std::vector<int>& idx,
                     int mtry, Rng& rng) {
  Tree tree;
  struct Job {
    int node;
    int begin;
    int end;
  };
  std::vector<Job> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, static_cast<int>(idx.size())});

  const int n_feat = static_cast<int>(x.cols());
  std::vector<int> features(n_feat);
  std::vector<std::pair<double, char>> scratch;

  while (!stack.empty()) {
    const Job job = stack.back();
    stack.pop_back();
    const int n = job.end - job.begin;
    int n_pos = 0;
    for (int i = job.begin; i < job.end; ++i) n_pos += y[idx[i]];

    TreeNode& node = tree.nodes[job.node];
    node.value = static_cast<double>(n_pos) / n;
    if (n_pos == 0 || n_pos == n || n < 2) continue;  // pure or singleton leaf

    // Feature subsample without replacement.
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const int j = i + static_cast<int>(rng.next_below(n_feat - i));
      std::swap(features[i], features[j]);
    }

    const double parent_impurity =
        1.0 - std::pow(static_cast<double>(n_pos) / n, 2) -
        std::pow(static_cast<double>(n - n_pos) / n, 2);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    for (int fi = 0; fi < mtry; ++fi) {
      const int f = features[fi];
      scratch.clear();
      scratch.reserve(n);
      for (int i = job.begin; i < job.end; ++i)
        scratch.emplace_back(x(idx[i], f), y[idx[i]]);
      std::sort(scratch.begin(), scratch.end());
      int left_n = 0, left_pos = 0;
      for (int i = 0; i + 1 < n; ++i) {
        ++left_n;
        left_pos += scratch[i].second;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const int right_n = n - left_n;
        const int right_pos = n_pos - left_pos;
        const double pl = static_cast<double>(left_pos) / left_n;
        const double pr = static_cast<double>(right_pos) / right_n;
        const double gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
        const double gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
        const double child =
            (left_n * gini_l + right_n * gini_r) / static_cast<double>(n);
        const double gain = parent_impurity - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
        }
      }
    }
    if (best_feature < 0) continue;  // all candidate features constant

    auto mid = std::stable_partition(idx.begin() + job.begin, idx.begin() + job.end,
                                     [&](int i) { return x(i, best_feature) <= best_threshold; });
    const int split = static_cast<int>(mid - idx.begin());
    if (split == job.begin || split == job.end) continue;  // numeric ties; keep as leaf

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[job.node];  // re-fetch: vector may have grown
    parent.feature = best_feature;
    parent.threshold = best_threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    stack.push_back({left_id, job.begin, split});
    stack.push_back({left_id + 1, split, job.end});
  }
  return tree;
}

class RandomForest final : public Classifier {
 public:
  RandomForest() { kind_ = ClassifierKind::TreeEnsemble; }

  static std::unique_ptr<RandomForest> train(const Mat& x, const std::vector<char>& y,
                                             int n_trees, std::uint64_t seed) {
    auto model = std::make_unique<RandomForest>();
    model->n_features_ = static_cast<int>(x.cols());
    model->seed_ = seed;
    model->trees_.resize(n_trees);
    const int n = static_cast<int>(x.rows());
    const int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.cols()))));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int t = 0; t < n_trees; ++t) {
      Rng rng(derive_seed(seed, 0x74726565, static_cast<std::uint64_t>(t)));
      std::vector<int> idx(n);
      for (int i = 0; i < n; ++i) idx[i] = static_cast<int>(rng.next_below(n));  // bootstrap
      model->trees_[t] = build_cart_tree(x, y, idx, mtry, rng);
    }
    return model;
  }

  double score_row(Eigen::Ref<const RowVec> features) const override {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(features);
    return sum / trees_.size();
  }

  nlohmann::json to_json() const override {
    nlohmann::json doc{{"kind", "tree_ensemble"},
                       {"n_features", n_features_},
                       {"seed", seed_}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    doc["trees"] = std::move(trees);
    return doc;
  }

  static std::unique_ptr<RandomForest> load(const nlohmann::json& doc) {
    auto model = std::make_unique<RandomForest>();
    model->n_features_ = doc.at("n_features").get<int>();
    model->seed_ = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("trees")) model->trees_.push_back(Tree::from_json(t));
    return model;
  }

 private:
  std::vector<Tree> trees_;
};

// ---------------------------------------------------------------------------
// Ridge-regularized logistic regression fitted by Newton iterations on
// standardized features.

class LogisticModel final : public Classifier {
 public:
  LogisticModel() { kind_ = ClassifierKind::Logistic; }

  static std::unique_ptr<LogisticModel> train(const Mat& x, const std::vector<char>& y,
                                              int iterations, double ridge, std::uint64_t seed) {
    auto model = std::make_unique<LogisticModel>();
    model->n_features_ = static_cast<int>(x.cols());
    model->seed_ = seed;

    const Eigen::Index n = x.rows();
    const Eigen::Index f = x.cols();
    model->mean_ = x.colwise().mean();
    model->scale_.resize(f);
    for (Eigen::Index j = 0; j < f; ++j) {
      const double var = (x.col(j).array() - model->mean_[j]).square().sum() / n;
      model->scale_[j] = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
    }
    Mat z = (x.rowwise() - model->mean_.transpose()).array().rowwise() *
            model->scale_.transpose().array();

    Vec labels(n);
    for (Eigen::Index i = 0; i < n; ++i) labels[i] = y[i];

    Vec w = Vec::Zero(f);
    double b = 0.0;
    const double lambda = ridge * n;
    for (int it = 0; it < iterations; ++it) {
      Vec margin = z * w;
      margin.array() += b;
      Vec p = margin.unaryExpr([](double v) { return sigmoid(v); });
      Vec resid = p - labels;
      Vec weight = (p.array() * (1.0 - p.array())).cwiseMax(1e-8);

      Mat h = z.transpose() * weight.asDiagonal() * z;
      h.diagonal().array() += lambda + 1e-8;
      Vec g = z.transpose() * resid + lambda * w;
      w -= h.ldlt().solve(g);
      const double hb = weight.sum() + 1e-8;
      b -= resid.sum() / hb;
    }
    model->weights_ = w;
    model->bias_ = b;
    return model;
  }

  double score_row(Eigen::Ref<const RowVec> features) const override {
    const double z =
        ((features - mean_.transpose()).array() * scale_.transpose().array()).matrix().dot(
            weights_.transpose()) + bias_;
    return sigmoid(z);
  }

  nlohmann::json to_json() const override {
    return {{"kind", "logistic"},
            {"n_features", n_features_},
            {"seed", seed_},
            {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
            {"scale", std::vector<double>(scale_.data(), scale_.data() + scale_.size())},
            {"weights", std::vector<double>(weights_.data(), weights_.data() + weights_.size())},
            {"bias", bias_}};
  }

  static std::unique_ptr<LogisticModel> load(const nlohmann::json& doc) {
    auto model = std::make_unique<LogisticModel>();
    model->n_features_ = doc.at("n_features").get<int>();
    model->seed_ = doc.at("seed").get<std::uint64_t>();
    auto mean = doc.at("mean").get<std::vector<double>>();
    auto scale = doc.at("scale").get<std::vector<double>>();
    auto weights = doc.at("weights").get<std::vector<double>>();
    model->mean_ = Eigen::Map<Vec>(mean.data(), mean.size());
    model->scale_ = Eigen::Map<Vec>(scale.data(), scale.size());
    model->weights_ = Eigen::Map<Vec>(weights.data(), weights.size());
    model->bias_ = doc.at("bias").get<double>();
    return model;
  }

 private:
  Vec mean_, scale_, weights_;
  double bias_ = 0.0;
};

// ---------------------------------------------------------------------------
// Gradient boosting on the logistic loss: depth-limited regression trees over
// quantile-binned features, Newton leaf weights, shrinkage 0.1.

class GradientBoosting final : public Classifier {
 public:
  GradientBoosting() { kind_ = ClassifierKind::GradientBoosting; }

  static std::unique_ptr<GradientBoosting> train(const Mat& x, const std::vector<char>& y,
                                                 const ClassifierParams& params,
                                                 std::uint64_t seed) {
    auto model = std::make_unique<GradientBoosting>();
    model->n_features_ = static_cast<int>(x.cols());
    model->seed_ = seed;
    model->shrinkage_ = params.boosting_shrinkage;

    const int n = static_cast<int>(x.rows());
    const int f = static_cast<int>(x.cols());
    constexpr int kBins = 64;

    // Quantile bin edges per feature; codes index the edge array.
    std::vector<std::vector<double>> edges(f);
    std::vector<std::vector<std::uint8_t>> codes(f, std::vector<std::uint8_t>(n));
    {
      std::vector<double> sorted(n);
      for (int j = 0; j < f; ++j) {
        for (int i = 0; i < n; ++i) sorted[i] = x(i, j);
        std::sort(sorted.begin(), sorted.end());
        auto& e = edges[j];
        for (int b = 1; b < kBins; ++b) {
          const double q = sorted[static_cast<std::size_t>(
              (static_cast<double>(b) / kBins) * (n - 1))];
          if (e.empty() || q > e.back()) e.push_back(q);
        }
        // code <= b exactly when x <= edges[b], matching the predict rule.
        for (int i = 0; i < n; ++i) {
          codes[j][i] = static_cast<std::uint8_t>(
              std::lower_bound(e.begin(), e.end(), x(i, j)) - e.begin());
        }
      }
    }

    Vec score = Vec::Zero(n);
    std::vector<double> grad(n), hess(n);
    std::vector<int> idx(n);

    for (int round = 0; round < params.boosting_rounds; ++round) {
      for (int i = 0; i < n; ++i) {
        const double p = sigmoid(score[i]);
        grad[i] = p - (y[i] ? 1.0 : 0.0);
        hess[i] = std::max(p * (1.0 - p), 1e-12);
      }
      std::iota(idx.begin(), idx.end(), 0);
      Tree tree = model->build_boost_tree(codes, edges, grad, hess, idx, params.boosting_depth);
      for (int i = 0; i < n; ++i) {
        int at = 0;
        while (tree.nodes[at].feature >= 0) {
          const auto& node = tree.nodes[at];
          at = x(i, node.feature) <= node.threshold ? node.left : node.right;
        }
        score[i] += model->shrinkage_ * tree.nodes[at].value;
      }
      model->trees_.push_back(std::move(tree));
    }
    return model;
  }

  double score_row(Eigen::Ref<const RowVec> features) const override {
    double z = 0.0;
    for (const auto& t : trees_) z += shrinkage_ * t.predict(features);
    return sigmoid(z);
  }

  nlohmann::json to_json() const override {
    nlohmann::json doc{{"kind", "gradient_boosting"},
                       {"n_features", n_features_},
                       {"seed", seed_},
                       {"shrinkage", shrinkage_}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    doc["trees"] = std::move(trees);
    return doc;
  }

  static std::unique_ptr<GradientBoosting> load(const nlohmann::json& doc) {
    auto model = std::make_unique<GradientBoosting>();
    model->n_features_ = doc.at("n_features").get<int>();
    model->seed_ = doc.at("seed").get<std::uint64_t>();
    model->shrinkage_ = doc.at("shrinkage").get<double>();
    for (const auto& t : doc.at("trees")) model->trees_.push_back(Tree::from_json(t));
    return model;
  }

 private:
  Tree build_boost_tree(const std::vector<std::vector<std::uint8_t>>& codes,
                        const std::vector<std::vector<double>>& edges,
                        const std::vector<double>& grad, const std::vector<double>& hess,
                        std::vector<int>& idx, int max_depth) {
    constexpr double kRegLambda = 1.0;
    Tree tree;
    struct Job {
      int node;
      int begin;
      int end;
      int depth;
    };
    std::vector<Job> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, static_cast<int>(idx.size()), 0});

    const int f = static_cast<int>(codes.size());
    while (!stack.empty()) {
      const Job job = stack.back();
      stack.pop_back();
      double g_total = 0.0, h_total = 0.0;
      for (int i = job.begin; i < job.end; ++i) {
        g_total += grad[idx[i]];
        h_total += hess[idx[i]];
      }
      TreeNode& node = tree.nodes[job.node];
      node.value = -g_total / (h_total + kRegLambda);
      if (job.depth >= max_depth || job.end - job.begin < 2) continue;

      const double parent_obj = g_total * g_total / (h_total + kRegLambda);
      double best_gain = 1e-9;
      int best_feature = -1;
      int best_bin = -1;
      std::vector<double> bin_g(65), bin_h(65);
      for (int j = 0; j < f; ++j) {
        const int n_edges = static_cast<int>(edges[j].size());
        if (n_edges == 0) continue;
        std::fill(bin_g.begin(), bin_g.end(), 0.0);
        std::fill(bin_h.begin(), bin_h.end(), 0.0);
        for (int i = job.begin; i < job.end; ++i) {
          bin_g[codes[j][idx[i]]] += grad[idx[i]];
          bin_h[codes[j][idx[i]]] += hess[idx[i]];
        }
        double gl = 0.0, hl = 0.0;
        for (int b = 0; b < n_edges; ++b) {  // split = "code <= b"
          gl += bin_g[b];
          hl += bin_h[b];
          const double gr = g_total - gl;
          const double hr = h_total - hl;
          if (hl < 1e-6 || hr < 1e-6) continue;
          const double gain =
              gl * gl / (hl + kRegLambda) + gr * gr / (hr + kRegLambda) - parent_obj;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = j;
            best_bin = b;
          }
        }
      }
      if (best_feature < 0) continue;

      const double threshold = edges[best_feature][best_bin];
      auto mid = std::stable_partition(
          idx.begin() + job.begin, idx.begin() + job.end,
          [&](int i) { return codes[best_feature][i] <= best_bin; });
      const int split = static_cast<int>(mid - idx.begin());
      if (split == job.begin || split == job.end) continue;

      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[job.node];
      parent.feature = best_feature;
      parent.threshold = threshold;
      parent.left = left_id;
      parent.right = left_id + 1;
      stack.push_back({left_id, job.begin, split, job.depth + 1});
      stack.push_back({left_id + 1, split, job.end, job.depth + 1});
    }
    return tree;
  }

  std::vector<Tree> trees_;
  double shrinkage_ = 0.1;
};

}  // namespace

std::unique_ptr<Classifier> Classifier::from_json(const nlohmann::json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "tree_ensemble") return RandomForest::load(doc);
  if (kind == "logistic") return LogisticModel::load(doc);
  if (kind == "gradient_boosting") return GradientBoosting::load(doc);
  throw ValidationError("model blob has unknown kind '" + kind + "'");
}

std::unique_ptr<Classifier> train_classifier(const Mat& features, const std::vector<char>& labels,
                                             ClassifierKind kind, std::uint64_t seed,
                                             const ClassifierParams& params) {
  if (features.rows() == 0) throw ValidationError("classifier training set is empty");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw ValidationError("feature/label row mismatch");
  const auto n_pos = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), static_cast<char>(1)));
  if (n_pos == 0 || n_pos == labels.size())
    throw ValidationError("classifier training set is single-class");

  switch (kind) {
    case ClassifierKind::TreeEnsemble:
      return RandomForest::train(features, labels, params.n_trees, seed);
    case ClassifierKind::Logistic:
      return LogisticModel::train(features, labels, params.logistic_iterations,
                                  params.logistic_ridge, seed);
    case ClassifierKind::GradientBoosting:
      return GradientBoosting::train(features, labels, params, seed);
  }
  throw ValidationError("unknown classifier kind");
}

std::unique_ptr<Classifier> train_classifier(const LabeledEdgeSet& train, ClassifierKind kind,
                                             std::uint64_t seed, const ClassifierParams& params) {
  std::vector<char> labels;
  labels.reserve(train.entries.size());
  for (const auto& e : train.entries) labels.push_back(e.positive ? 1 : 0);
  return train_classifier(train.features, labels, kind, seed, params);
}

Vec predict_scores(const Classifier& model, const LabeledEdgeSet& candidates) {
  if (candidates.features.cols() != model.n_features())
    throw ValidationError("candidate feature dimension " +
                          std::to_string(candidates.features.cols()) +
                          " does not match the model's " + std::to_string(model.n_features()) +
                          " (combiner mismatch?)");
  return model.score(candidates.features);
}

}  // namespace phagraph
