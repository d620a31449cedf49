#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "phagraph/rng.hpp"
#include "phagraph/stats.hpp"
#include "test_util.hpp"

using namespace phagraph;
using namespace phagraph::test;

TEST_CASE("star graph histograms") {
  std::vector<std::pair<std::string, std::string>> edges;
  const int n = 12;
  for (int i = 0; i < n; ++i) edges.push_back({"d" + std::to_string(i), "hub"});
  auto g = graph_of(edges);

  auto app_hist = degree_histogram(g, Side::App);
  REQUIRE(app_hist.counts.size() == 1);
  CHECK(app_hist.counts.at(n) == 1);
  CHECK_FALSE(app_hist.reliable);

  auto dev_hist = degree_histogram(g, Side::Device);
  REQUIRE(dev_hist.counts.size() == 1);
  CHECK(dev_hist.counts.at(1) == n);
  CHECK_FALSE(dev_hist.reliable);
}

TEST_CASE("histogram mass equals vertex count per side") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<InstallEvent> events;
    for (int i = 0; i < 60; ++i)
      events.push_back(ev("d" + std::to_string(rng.next_below(12)),
                          "m" + std::to_string(rng.next_below(9)), 0));
    auto g = build_graph(events);
    for (Side side : {Side::Device, Side::App}) {
      auto hist = degree_histogram(g, side);
      std::size_t mass = 0;
      for (const auto& [deg, count] : hist.counts) mass += count;
      CHECK(mass == (side == Side::Device ? g.n_devices() : g.n_apps()));
    }
  }
}

TEST_CASE("all-equal degrees flag the exponent as unreliable") {
  // 12 devices, 12 apps, every vertex degree exactly 2 (a cycle).
  std::vector<std::pair<std::string, std::string>> edges;
  const int n = 12;
  for (int i = 0; i < n; ++i) {
    edges.push_back({"d" + std::to_string(i), "m" + std::to_string(i)});
    edges.push_back({"d" + std::to_string(i), "m" + std::to_string((i + 1) % n)});
  }
  auto g = graph_of(edges);
  auto hist = degree_histogram(g, Side::App);
  CHECK_FALSE(hist.reliable);
  CHECK(hist.counts.at(2) == n);
}

TEST_CASE("power-law MLE recovers the exponent of sampled degrees") {
  // Oracle data: draw from a discrete power law with known exponent via
  // inverse CDF, then check the fit.
  for (double gamma : {2.0, 2.3, 2.8}) {
    std::vector<double> cumulative;
    const int kmax = 10000;
    double sum = 0.0;
    for (int k = 1; k <= kmax; ++k) {
      sum += std::pow(k, -gamma);
      cumulative.push_back(sum);
    }
    for (auto& c : cumulative) c /= sum;

    Rng rng(101);
    std::vector<Index> sample;
    for (int i = 0; i < 20000; ++i) {
      const double u = rng.next_double();
      const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
      sample.push_back(static_cast<Index>(1 + (it - cumulative.begin())));
    }
    auto fit = fit_power_law(sample);
    REQUIRE(fit.reliable);
    CHECK(fit.alpha == doctest::Approx(gamma).epsilon(0.12));
  }
}

TEST_CASE("k-hop correlation on the toy graph matches brute-force enumeration") {
  // d1-m1, d1-m2, d2-m2.
  auto g = graph_of({{"d1", "m1"}, {"d1", "m2"}, {"d2", "m2"}});

  // Independent oracle: enumerate all 2-hop paths (m -> d -> m') by hand over
  // the adjacency and compute the Pearson coefficient of (deg(m), mean deg of
  // distinct m' != m).
  std::vector<double> xs, ys;
  for (Index m = 0; m < g.n_apps(); ++m) {
    std::set<Index> reach;
    for (Index d : g.app_neighbors(m))
      for (Index m2 : g.device_neighbors(d))
        if (m2 != m) reach.insert(m2);
    if (reach.empty()) continue;
    double mean = 0.0;
    for (Index m2 : reach) mean += g.app_degree(m2);
    xs.push_back(g.app_degree(m));
    ys.push_back(mean / reach.size());
  }
  REQUIRE(xs.size() == 2);
  const double mx = (xs[0] + xs[1]) / 2, my = (ys[0] + ys[1]) / 2;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double expected = sxy / std::sqrt(sxx * syy);

  const double actual = khop_degree_correlation(g, 2, 100, 1);
  CHECK(actual == doctest::Approx(expected).epsilon(1e-12));
  CHECK(actual == doctest::Approx(-1.0).epsilon(1e-12));  // oracle value, frozen
}

TEST_CASE("k-hop correlation with zero variance reports an error") {
  // Two disjoint single edges: every 2-hop reachable set is empty.
  auto disjoint = graph_of({{"d1", "m1"}, {"d2", "m2"}});
  CHECK_THROWS_AS(khop_degree_correlation(disjoint, 2, 10, 1), ComputeError);

  // Symmetric 4-cycle: all app degrees equal -> zero variance.
  auto cycle = graph_of({{"d1", "m1"}, {"d1", "m2"}, {"d2", "m1"}, {"d2", "m2"}});
  CHECK_THROWS_AS(khop_degree_correlation(cycle, 2, 10, 1), ComputeError);
}

TEST_CASE("k-hop correlation validates arguments") {
  auto g = graph_of({{"d1", "m1"}});
  CHECK_THROWS_AS(khop_degree_correlation(g, 3, 10, 1), ValidationError);
  CHECK_THROWS_AS(khop_degree_correlation(g, 2, 1, 1), ValidationError);
}

TEST_CASE("sampled k-hop estimate agrees with the full computation") {
  Rng rng(5);
  std::vector<InstallEvent> events;
  for (int i = 0; i < 400; ++i)
    events.push_back(ev("d" + std::to_string(rng.next_below(60)),
                        "m" + std::to_string(1 + rng.next_below(30) % (1 + rng.next_below(30))),
                        0));
  auto g = build_graph(events);
  const double full = khop_degree_correlation(g, 2, g.n_apps(), 1);
  const double sampled = khop_degree_correlation(g, 2, g.n_apps() - 4, 99);
  CHECK(std::abs(full - sampled) < 0.35);
  CHECK(full * sampled > 0.0);  // same sign
}
