#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "phagraph/metrics.hpp"
#include "phagraph/rng.hpp"

using namespace phagraph;

namespace {

// Exhaustive O(n^2) oracle: enumerate every distinct score as a threshold
// (classify positive when score >= threshold) plus the all-negative point,
// recomputing the confusion matrix by a full scan each time.
struct OraclePoint {
  double fpr, tpr, precision;
  long long tp, fp;
};

std::vector<OraclePoint> oracle_points(const std::vector<ScoredItem>& items) {
  long long n_pos = 0, n_neg = 0;
  for (const auto& it : items) (it.positive ? n_pos : n_neg)++;

  std::set<double, std::greater<double>> thresholds;
  for (const auto& it : items) thresholds.insert(it.score);

  std::vector<OraclePoint> points;
  points.push_back({0.0, 0.0, 1.0, 0, 0});  // threshold above every score
  for (double th : thresholds) {
    long long tp = 0, fp = 0;
    for (const auto& it : items) {
      if (it.score >= th) (it.positive ? tp : fp)++;
    }
    points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos,
                      static_cast<double>(tp) / (tp + fp), tp, fp});
  }
  return points;
}

double oracle_auc(const std::vector<OraclePoint>& pts) {
  double auc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    auc += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  return auc;
}

double oracle_ap(const std::vector<OraclePoint>& pts) {
  double ap = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    ap += (pts[i].tpr - pts[i - 1].tpr) * pts[i].precision;
  return ap;
}

double oracle_tpr_at(const std::vector<OraclePoint>& pts, double target) {
  double best = 0.0;
  for (const auto& p : pts)
    if (p.fpr <= target) best = std::max(best, p.tpr);
  return best;
}

std::vector<ScoredItem> random_items(Rng& rng, int max_n) {
  const int n = 2 + static_cast<int>(rng.next_below(max_n - 1));
  std::vector<ScoredItem> items;
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    // Coarse score grid so ties actually occur.
    const double score = static_cast<double>(rng.next_below(20)) / 19.0;
    const bool positive = rng.next_double() < 0.5;
    items.push_back({score, positive});
    (positive ? has_pos : has_neg) = true;
  }
  if (!has_pos) items.push_back({0.3, true});
  if (!has_neg) items.push_back({0.6, false});
  return items;
}

}  // namespace

TEST_CASE("perfect separation gives AUC 1 and full TPR at every target") {
  std::vector<ScoredItem> items;
  for (int i = 0; i < 50; ++i) items.push_back({0.9 + 0.001 * i, true});
  for (int i = 0; i < 50; ++i) items.push_back({0.1 + 0.001 * i, false});
  auto report = roc_and_metrics(items);
  CHECK(report.auc == doctest::Approx(1.0));
  CHECK(report.ap == doctest::Approx(1.0));
  CHECK(report.tpr_at.at(0.0001).tpr == doctest::Approx(1.0));
  CHECK(report.tpr_at.at(0.005).tpr == doctest::Approx(1.0));
  CHECK(report.roc.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(report.roc.back() == std::pair<double, double>{1.0, 1.0});
}

TEST_CASE("random scores on balanced labels give AUC near 0.5") {
  Rng rng(123);
  std::vector<ScoredItem> items;
  for (int i = 0; i < 10000; ++i) items.push_back({rng.next_double(), i % 2 == 0});
  auto report = roc_and_metrics(items);
  CHECK(std::abs(report.auc - 0.5) <= 0.02);
}

TEST_CASE("hand-built 6-point list matches exhaustive threshold enumeration") {
  std::vector<ScoredItem> items{{0.9, true}, {0.8, false}, {0.8, true},
                                {0.5, true}, {0.4, false}, {0.1, false}};
  auto report = roc_and_metrics(items);
  auto pts = oracle_points(items);
  CHECK(report.auc == doctest::Approx(oracle_auc(pts)).epsilon(1e-12));
  CHECK(report.ap == doctest::Approx(oracle_ap(pts)).epsilon(1e-12));
  for (double target : {0.0001, 0.001, 0.005, 0.5}) {
    auto it = report.tpr_at.find(target);
    if (it == report.tpr_at.end()) continue;
    CHECK(it->second.tpr == doctest::Approx(oracle_tpr_at(pts, target)).epsilon(1e-12));
  }
}

TEST_CASE("metric oracle equivalence on 100 random score lists") {
  Rng rng(2025);
  for (int trial = 0; trial < 100; ++trial) {
    auto items = random_items(rng, 200);
    auto report = roc_and_metrics(items, {0.0001, 0.001, 0.005, 0.02, 0.3});
    auto pts = oracle_points(items);
    CHECK(std::abs(report.auc - oracle_auc(pts)) <= 1e-9);
    CHECK(std::abs(report.ap - oracle_ap(pts)) <= 1e-9);
    for (const auto& [target, pt] : report.tpr_at)
      CHECK(pt.tpr == doctest::Approx(oracle_tpr_at(pts, target)).epsilon(1e-12));
    // ROC monotonicity and endpoints.
    CHECK(report.roc.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(report.roc.back() == std::pair<double, double>{1.0, 1.0});
    for (std::size_t i = 1; i < report.roc.size(); ++i) {
      CHECK(report.roc[i].first >= report.roc[i - 1].first);
      CHECK(report.roc[i].second >= report.roc[i - 1].second);
    }
    CHECK(report.ap >= 0.0);
    CHECK(report.ap <= 1.0 + 1e-12);
  }
}

TEST_CASE("AP is 1 exactly when all positives outrank all negatives") {
  std::vector<ScoredItem> separated{{0.9, true}, {0.7, true}, {0.3, false}, {0.2, false}};
  CHECK(roc_and_metrics(separated).ap == doctest::Approx(1.0));

  std::vector<ScoredItem> mixed{{0.9, true}, {0.7, false}, {0.3, true}, {0.2, false}};
  CHECK(roc_and_metrics(mixed).ap < 1.0);
}

TEST_CASE("tied scores collapse into one operating point") {
  std::vector<ScoredItem> items{{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}};
  auto report = roc_and_metrics(items);
  REQUIRE(report.roc.size() == 2);  // (0,0) and (1,1)
  CHECK(report.auc == doctest::Approx(0.5));
}

TEST_CASE("single-class input is a metric error") {
  std::vector<ScoredItem> only_pos{{0.5, true}, {0.7, true}};
  CHECK_THROWS_AS(roc_and_metrics(only_pos), ValidationError);
  std::vector<ScoredItem> only_neg{{0.5, false}};
  CHECK_THROWS_AS(roc_and_metrics(only_neg), ValidationError);
}

TEST_CASE("operating point counts are consistent") {
  Rng rng(7);
  auto items = random_items(rng, 100);
  long long n_pos = 0, n_neg = 0;
  for (const auto& it : items) (it.positive ? n_pos : n_neg)++;
  auto report = roc_and_metrics(items);
  for (const auto& [target, pt] : report.tpr_at) {
    CHECK(pt.tp + pt.fn == n_pos);
    CHECK(pt.fp + pt.tn == n_neg);
    CHECK(pt.fpr == doctest::Approx(static_cast<double>(pt.fp) / n_neg));
    CHECK(pt.tpr == doctest::Approx(static_cast<double>(pt.tp) / n_pos));
    CHECK(pt.fpr <= target);
  }
}

TEST_CASE("auc equals the trapezoidal integral of the reported roc") {
  Rng rng(17);
  auto items = random_items(rng, 150);
  auto report = roc_and_metrics(items);
  double integral = 0.0;
  for (std::size_t i = 1; i < report.roc.size(); ++i)
    integral += (report.roc[i].first - report.roc[i - 1].first) *
                (report.roc[i].second + report.roc[i - 1].second) / 2.0;
  CHECK(std::abs(integral - report.auc) <= 1e-9);
}
