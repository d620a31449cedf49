#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "phagraph/classifier.hpp"
#include "phagraph/dataset.hpp"
#include "phagraph/explain.hpp"
#include "phagraph/metrics.hpp"
#include "phagraph/rng.hpp"
#include "test_util.hpp"

using namespace phagraph;
using namespace phagraph::test;

namespace {

Embedding fixed_embedding(Index n_dev, Index n_app, int dim, std::uint64_t graph_hash,
                          std::uint64_t seed) {
  Embedding phi;
  phi.n_devices = n_dev;
  phi.graph_hash = graph_hash;
  phi.vectors.resize(n_dev + n_app, dim);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < phi.vectors.size(); ++i)
    phi.vectors.data()[i] = rng.next_double(-1, 1);
  return phi;
}

}  // namespace

TEST_CASE("combiners compute their exact arithmetic") {
  RowVec a(2), b(2);
  a << 1, 2;
  b << 3, 4;
  RowVec concat = combine_vectors(a, b, Combiner::Concat);
  REQUIRE(concat.size() == 4);
  CHECK(concat[0] == 1);
  CHECK(concat[1] == 2);
  CHECK(concat[2] == 3);
  CHECK(concat[3] == 4);

  RowVec had = combine_vectors(a, b, Combiner::Hadamard);
  CHECK(had[0] == 3);
  CHECK(had[1] == 8);

  RowVec avg = combine_vectors(a, a, Combiner::Average);
  CHECK(avg == a);

  RowVec l1 = combine_vectors(a, b, Combiner::WeightedL1);
  CHECK(l1[0] == 2);
  CHECK(l1[1] == 2);

  RowVec l2 = combine_vectors(a, b, Combiner::WeightedL2);
  CHECK(l2[0] == 4);
  CHECK(l2[1] == 4);
}

TEST_CASE("combiner arithmetic matches direct formulas on random vectors") {
  Rng rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng.next_below(12));
    RowVec a(dim), b(dim);
    for (int j = 0; j < dim; ++j) {
      a[j] = rng.next_double(-5, 5);
      b[j] = rng.next_double(-5, 5);
    }
    for (int j = 0; j < dim; ++j) {
      CHECK(combine_vectors(a, b, Combiner::Average)[j] == doctest::Approx((a[j] + b[j]) / 2));
      CHECK(combine_vectors(a, b, Combiner::Hadamard)[j] == doctest::Approx(a[j] * b[j]));
      CHECK(combine_vectors(a, b, Combiner::WeightedL1)[j] ==
            doctest::Approx(std::abs(a[j] - b[j])));
      CHECK(combine_vectors(a, b, Combiner::WeightedL2)[j] ==
            doctest::Approx((a[j] - b[j]) * (a[j] - b[j])));
    }
    CHECK(combined_dim(Combiner::Concat, dim) == 2 * dim);
    CHECK(combined_dim(Combiner::Hadamard, dim) == dim);
  }
}

TEST_CASE("mismatched vector dimensions are an internal error") {
  RowVec a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(combine_vectors(a, b, Combiner::Average), ComputeError);
}

TEST_CASE("negative sampling on a complete bipartite graph fails") {
  auto g = graph_of({{"d1", "m1"}, {"d1", "m2"}, {"d2", "m1"}, {"d2", "m2"}});
  CHECK_THROWS_AS(sample_negative_edges(g, 1, {}, 1), ValidationError);
}

TEST_CASE("negative sampling returns distinct non-edges") {
  // 3x3 grid with 4 edges -> 5 non-edges.
  auto g = graph_of({{"d1", "m1"}, {"d1", "m2"}, {"d2", "m2"}, {"d3", "m3"}});
  auto negs = sample_negative_edges(g, 3, {}, 42);
  CHECK(negs.size() == 3);
  std::set<std::pair<Index, Index>> seen;
  for (const auto& [d, m] : negs) {
    CHECK(!g.has_edge(d, m));
    CHECK(seen.insert({d, m}).second);
  }
  // Asking for every non-edge works; one more fails.
  CHECK(sample_negative_edges(g, 5, {}, 1).size() == 5);
  CHECK_THROWS_AS(sample_negative_edges(g, 6, {}, 1), ValidationError);
}

TEST_CASE("negative sampling respects the exclusion set") {
  auto g = graph_of({{"d1", "m1"}, {"d2", "m2"}, {"d3", "m3"}});
  EdgeKeySet exclusion;
  exclusion.insert(edge_key(0, 1));
  exclusion.insert(edge_key(0, 2));
  for (int seed = 0; seed < 20; ++seed) {
    auto negs = sample_negative_edges(g, 4, exclusion, seed);
    for (const auto& [d, m] : negs) {
      CHECK(edge_key(d, m) != edge_key(0, 1));
      CHECK(edge_key(d, m) != edge_key(0, 2));
    }
  }
}

TEST_CASE("negative sampling is uniform over non-edges (chi-square)") {
  // 10x10 with a diagonal matching: 90 non-edges.
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < 10; ++i)
    edges.push_back({"d" + std::to_string(i), "m" + std::to_string(i)});
  auto g = graph_of(edges);

  std::map<std::uint64_t, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto negs = sample_negative_edges(g, 1, {}, derive_seed(1000, i));
    ++counts[edge_key(negs[0].first, negs[0].second)];
  }
  CHECK(counts.size() == 90);
  const double expected = static_cast<double>(draws) / 90;
  double chi2 = 0.0;
  for (const auto& [key, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  // df = 89; Wilson-Hilferty upper 1% critical value.
  const double df = 89.0;
  const double z99 = 2.3263478740408408;
  const double crit = df * std::pow(1.0 - 2.0 / (9.0 * df) + z99 * std::sqrt(2.0 / (9.0 * df)), 3);
  CHECK(chi2 < crit);
}

TEST_CASE("build_datasets balances classes and enforces the leakage hash") {
  std::vector<InstallEvent> events;
  for (int i = 0; i < 8; ++i)
    events.push_back(ev("d" + std::to_string(i % 5), "m" + std::to_string(i % 4), i));
  events.push_back(ev("d1", "m0", 12));  // warm novel pair in test
  events.push_back(ev("d9", "m0", 13));  // cold device in test
  auto split = temporal_split(events, 7, 10);
  auto graph_train = build_graph(split_edges_to_events(split.train_edges));
  auto phi = fixed_embedding(graph_train.n_devices(), graph_train.n_apps(), 4,
                             graph_train.content_hash(), 5);

  auto datasets = build_datasets(phi, split, graph_train, Combiner::Concat, ColdPolicy::Drop, 3);
  CHECK(datasets.train.n_positive == datasets.train.n_negative);
  CHECK(datasets.test.n_positive == datasets.test.n_negative);
  CHECK(datasets.train.n_positive == graph_train.n_edges());
  CHECK(datasets.test.cold_dropped == 1);
  CHECK(datasets.test.features.cols() == 8);

  // Negatives never coincide with observed edges, and train/test negatives
  // are disjoint.
  std::set<std::uint64_t> train_negs;
  for (const auto& e : datasets.train.entries)
    if (!e.positive) {
      CHECK(!graph_train.has_edge(e.device, e.app));
      train_negs.insert(edge_key(e.device, e.app));
    }
  for (const auto& e : datasets.test.entries)
    if (!e.positive) {
      CHECK(!graph_train.has_edge(e.device, e.app));
      CHECK(!train_negs.count(edge_key(e.device, e.app)));
    }

  // Wrong-graph embedding is rejected.
  auto wrong = fixed_embedding(graph_train.n_devices(), graph_train.n_apps(), 4, 0xdead, 5);
  CHECK_THROWS_AS(build_datasets(wrong, split, graph_train, Combiner::Concat, ColdPolicy::Drop, 3),
                  ValidationError);
}

TEST_CASE("zero-vector cold policy keeps flagged rows") {
  std::vector<InstallEvent> events{ev("d1", "m1", 1), ev("d2", "m2", 2), ev("d3", "m3", 3),
                                   ev("d4", "m4", 4), ev("d1", "m2", 5), ev("d9", "m1", 9),
                                   ev("d1", "m9", 8)};
  auto split = temporal_split(events, 5, 10);
  auto graph_train = build_graph(split_edges_to_events(split.train_edges));
  auto phi = fixed_embedding(graph_train.n_devices(), graph_train.n_apps(), 4,
                             graph_train.content_hash(), 7);
  auto datasets =
      build_datasets(phi, split, graph_train, Combiner::Concat, ColdPolicy::ZeroVector, 3);
  CHECK(datasets.test.cold_dropped == 0);
  std::size_t cold_rows = 0;
  for (std::size_t i = 0; i < datasets.test.entries.size(); ++i) {
    const auto& e = datasets.test.entries[i];
    if (!e.cold) continue;
    ++cold_rows;
    // The missing side of the concat is zero-featurized.
    const auto row = datasets.test.features.row(static_cast<Eigen::Index>(i));
    if (e.device == graph_train.n_devices()) CHECK(row.head(4).cwiseAbs().sum() == 0.0);
    if (e.app == graph_train.n_apps()) CHECK(row.tail(4).cwiseAbs().sum() == 0.0);
  }
  CHECK(cold_rows == 2);
}

TEST_CASE("classifiers fit a linearly separable toy exactly") {
  const int n = 60;
  Mat x(n, 2);
  std::vector<char> y(n);
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    x(i, 0) = pos ? 2.0 + 0.01 * i : -2.0 - 0.01 * i;
    x(i, 1) = 0.5;
    y[i] = pos;
  }
  for (auto kind : {ClassifierKind::TreeEnsemble, ClassifierKind::Logistic,
                    ClassifierKind::GradientBoosting}) {
    auto model = train_classifier(x, y, kind, 11);
    Vec scores = model->score(x);
    int correct = 0;
    for (int i = 0; i < n; ++i) correct += (scores[i] >= 0.5) == (y[i] != 0);
    CHECK(correct == n);
    for (int i = 0; i < n; ++i) {
      CHECK(scores[i] >= 0.0);
      CHECK(scores[i] <= 1.0);
    }
  }
}

TEST_CASE("label-permuted features give chance-level AUC") {
  Rng rng(404);
  const int n = 4000;
  Mat x(n, 6);
  std::vector<char> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 6; ++j) x(i, j) = rng.next_double(-1, 1);
    y[i] = i % 2 == 0;  // labels independent of features
  }
  auto model = train_classifier(x, y, ClassifierKind::TreeEnsemble, 3);
  auto report = roc_and_metrics(model->score(x.topRows(n / 2)),
                                std::vector<char>(y.begin(), y.begin() + n / 2));
  // In-sample forest scores memorize, so evaluate on fresh draws instead.
  Mat fresh(n, 6);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 6; ++j) fresh(i, j) = rng.next_double(-1, 1);
  report = roc_and_metrics(model->score(fresh), y);
  CHECK(std::abs(report.auc - 0.5) <= 0.05);
}

TEST_CASE("all classifier kinds separate 3-sigma Gaussians with AUC >= 0.95") {
  Rng rng(909);
  const int n = 2000;
  Mat x(n, 4);
  std::vector<char> y(n);
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    for (int j = 0; j < 4; ++j) x(i, j) = rng.next_gaussian() + (pos ? 3.0 : 0.0);
    y[i] = pos;
  }
  Mat test_x(n, 4);
  std::vector<char> test_y(n);
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 1;
    for (int j = 0; j < 4; ++j) test_x(i, j) = rng.next_gaussian() + (pos ? 3.0 : 0.0);
    test_y[i] = pos;
  }
  for (auto kind : {ClassifierKind::TreeEnsemble, ClassifierKind::Logistic,
                    ClassifierKind::GradientBoosting}) {
    auto model = train_classifier(x, y, kind, 17);
    auto report = roc_and_metrics(model->score(test_x), test_y);
    CHECK(report.auc >= 0.95);
  }
}

TEST_CASE("single-class training input is rejected") {
  Mat x(4, 2);
  x.setZero();
  std::vector<char> y{1, 1, 1, 1};
  CHECK_THROWS_AS(train_classifier(x, y, ClassifierKind::Logistic, 1), ValidationError);
}

TEST_CASE("classifier training is seeded and reproducible") {
  Rng rng(31);
  const int n = 400;
  Mat x(n, 5);
  std::vector<char> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.next_double(-1, 1);
    y[i] = rng.next_double() < 0.5;
  }
  if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
  if (std::count(y.begin(), y.end(), 0) == 0) y[1] = 0;
  for (auto kind : {ClassifierKind::TreeEnsemble, ClassifierKind::Logistic,
                    ClassifierKind::GradientBoosting}) {
    auto a = train_classifier(x, y, kind, 55);
    auto b = train_classifier(x, y, kind, 55);
    CHECK(a->score(x) == b->score(x));
  }
}

TEST_CASE("model JSON round trip preserves scores") {
  Rng rng(77);
  const int n = 200;
  Mat x(n, 3);
  std::vector<char> y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.next_double(-1, 1);
    y[i] = x(i, 0) + x(i, 1) > 0;
  }
  if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
  if (std::count(y.begin(), y.end(), 0) == 0) y[1] = 0;
  for (auto kind : {ClassifierKind::TreeEnsemble, ClassifierKind::Logistic,
                    ClassifierKind::GradientBoosting}) {
    auto model = train_classifier(x, y, kind, 5);
    auto reloaded = Classifier::from_json(model->to_json());
    CHECK(model->score(x) == reloaded->score(x));
    CHECK(reloaded->kind() == kind);
  }
}

TEST_CASE("predict_scores is a pure per-item function") {
  auto g = graph_of({{"d1", "m1"}, {"d2", "m2"}, {"d1", "m2"}});
  auto phi = fixed_embedding(g.n_devices(), g.n_apps(), 4, g.content_hash(), 3);
  std::vector<std::pair<Index, Index>> pos{{0, 0}, {1, 1}};
  std::vector<std::pair<Index, Index>> neg{{1, 0}, {0, 1}};
  auto set = assemble_labeled_set(phi, pos, neg, Combiner::Concat);

  Mat x(set.features.rows(), set.features.cols());
  std::vector<char> y{1, 1, 0, 0};
  auto model = train_classifier(set.features, y, ClassifierKind::Logistic, 1);

  Vec scores = predict_scores(*model, set);
  // Reversed candidate order gives the same per-pair scores.
  auto reversed_pos = pos;
  std::reverse(reversed_pos.begin(), reversed_pos.end());
  auto reversed_neg = neg;
  std::reverse(reversed_neg.begin(), reversed_neg.end());
  auto reversed = assemble_labeled_set(phi, reversed_pos, reversed_neg, Combiner::Concat);
  Vec scores_rev = predict_scores(*model, reversed);
  CHECK(scores[0] == scores_rev[1]);
  CHECK(scores[1] == scores_rev[0]);
  CHECK(scores[2] == scores_rev[3]);

  // Empty candidate list scores to an empty vector.
  auto empty = assemble_labeled_set(phi, {}, {}, Combiner::Concat);
  CHECK(predict_scores(*model, empty).size() == 0);

  // Combiner mismatch is a contract error.
  auto mismatched = assemble_labeled_set(phi, pos, neg, Combiner::Hadamard);
  CHECK_THROWS_AS(predict_scores(*model, mismatched), ValidationError);
}

TEST_CASE("tree ensemble defaults to 20 trees") {
  ClassifierParams params;
  CHECK(params.n_trees == 20);
}

TEST_CASE("explain_prediction surfaces connecting walks") {
  // The motivating toy: d1 - m5 - d4 - m3 plus filler.
  auto g = graph_of({{"d1", "m5"}, {"d4", "m5"}, {"d4", "m3"}, {"d2", "m3"}, {"d2", "m2"}});
  const Index d1 = g.find_device("d1");
  const Index m3 = g.find_app("m3");
  auto traces = explain_prediction(g, d1, m3, 4000, 4, 9);
  REQUIRE(!traces.empty());

  std::size_t total_hits = 0;
  bool found_toy_path = false;
  for (const auto& t : traces) {
    total_hits += t.hits;
    CHECK(t.vertices.front() == d1);
    CHECK(t.vertices.back() == m3);
    const std::vector<Index> toy{d1, g.find_app("m5"), g.find_device("d4"), m3};
    if (t.vertices == toy) {
      found_toy_path = true;
      CHECK(t.order == 2);
    }
  }
  CHECK(found_toy_path);
  CHECK(total_hits <= 4000);
}

TEST_CASE("explain_prediction on a disconnected pair is empty") {
  auto g = graph_of({{"d1", "m1"}, {"d2", "m2"}});
  auto traces = explain_prediction(g, g.find_device("d1"), g.find_app("m2"), 500, 4, 1);
  CHECK(traces.empty());
}
