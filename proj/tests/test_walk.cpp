#include <doctest.h>

#include <cmath>
#include <numbers>

#include <vrnbw/walk.hpp>

using namespace vrnbw;

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("uniform01 lies in [0, 1)") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("graph topologies") {
  const GraphTopology k5 = GraphTopology::complete(5);
  CHECK(k5.is_complete());
  CHECK(k5.min_degree() == 4);
  const GraphTopology c6 = GraphTopology::cycle(6);
  CHECK_FALSE(c6.is_complete());
  CHECK(c6.degree(0) == 2);
  CHECK(c6.adjacent(0, 5));
  CHECK_FALSE(c6.adjacent(0, 2));
  const std::pair<int, int> bad[] = {{0, 0}};
  CHECK_THROWS_AS(GraphTopology::from_edges(3, bad), ConfigError);
}

TEST_CASE("walk configuration errors") {
  const std::pair<int, int> path[] = {{0, 1}, {1, 2}, {2, 3}};
  CHECK_THROWS_AS(init_walk(GraphTopology::from_edges(4, path), 2.0, 1), ConfigError);
  CHECK_THROWS_AS(init_walk(GraphTopology::complete(4), 0.5, 1), ConfigError);
  CHECK_THROWS_AS(init_walk(GraphTopology::complete(4), 2.0, 1, 7), ConfigError);
}

TEST_CASE("walk is deterministic given its seed") {
  const GraphTopology g = GraphTopology::complete(6);
  WalkState a = init_walk(g, 2.0, 99, std::nullopt, true);
  WalkState b = init_walk(g, 2.0, 99, std::nullopt, true);
  run(a, 5000);
  run(b, 5000);
  CHECK(a.path == b.path);
  CHECK(a.counts == b.counts);
  WalkState c = init_walk(g, 2.0, 100, std::nullopt, true);
  run(c, 5000);
  CHECK(a.path != c.path);
}

TEST_CASE("walk never backtracks and keeps consistent counts") {
  const GraphTopology g = GraphTopology::complete(5);
  WalkState s = init_walk(g, 1.5, 3, std::nullopt, true);
  run(s, 20000);
  REQUIRE(s.path.size() == static_cast<size_t>(s.n + 1));
  std::vector<std::int64_t> counts(5, 0);
  for (size_t t = 1; t < s.path.size(); ++t) {
    CHECK(s.path[t] != s.path[t - 1]);
    if (t >= 2) CHECK(s.path[t] != s.path[t - 2]);
    ++counts[s.path[t]];
  }
  CHECK(counts == s.counts);
  std::int64_t total = 0;
  for (auto z : s.counts) total += z;
  CHECK(total == s.n);
  CHECK(s.bound_violations == 0);
}

TEST_CASE("on a cycle the walk goes round in one direction") {
  const GraphTopology g = GraphTopology::cycle(7);
  WalkState s = init_walk(g, 3.0, 11, 0, true);
  run(s, 100);
  const int dir = (s.path[1] - s.path[0] + 7) % 7;
  for (size_t t = 1; t < s.path.size(); ++t) CHECK((s.path[t] - s.path[t - 1] + 7) % 7 == dir);
}

TEST_CASE("transition probabilities are proportional to (1 + Z)^alpha") {
  const GraphTopology g = GraphTopology::complete(5);
  WalkState s = init_walk(g, 2.0, 1, 0);
  run(s, 40);
  std::vector<double> w(5, 0.0);
  double total = 0.0;
  for (int k = 0; k < 5; ++k)
    if (k != s.current && k != s.previous) {
      w[k] = std::pow(1.0 + static_cast<double>(s.counts[k]), 2.0);
      total += w[k];
    }
  const int draws = 200000;
  std::vector<int> hits(5, 0);
  Rng rng(77);
  for (int d = 0; d < draws; ++d) ++hits[sample_next(s, rng)];
  for (int k = 0; k < 5; ++k) {
    const double p = w[k] / total;
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(static_cast<double>(hits[k]) / draws - p) <= 4.0 * sigma + 1e-12);
  }
}

TEST_CASE("occupation measure and support detection") {
  const GraphTopology g = GraphTopology::complete(6);
  WalkState s = init_walk(g, 4.0, 21);
  run(s, 30000);
  const ProbabilityMeasure v = s.occupation();
  CHECK(v.values().sum() == doctest::Approx(1.0));
  CHECK(v[s.current] == doctest::Approx((1.0 + s.counts[s.current]) / (s.n + 6)));
  const auto S = detect_support(s, 1000);
  CHECK(S.size() >= 3);
  for (int i : S) CHECK(s.last_visit[i] > s.n - 1000);
  CHECK(default_window(6) == 500);
  CHECK(default_window(80) == 800);
  CHECK_THROWS_AS(detect_support(s, 0), ConfigError);
}

TEST_CASE("run records snapshots") {
  WalkState s = init_walk(GraphTopology::complete(4), 1.0, 8);
  const TrajectorySummary t = run(s, 1000, 100);
  REQUIRE(t.snapshots.size() == 10);
  // init_walk already took the first step.
  CHECK(s.n == 1001);
  CHECK(t.snapshots.back().n == 1000);
  CHECK(t.bound_violations == 0);
}

TEST_CASE("path formation bound on the complete graph with four vertices") {
  const GraphTopology g = GraphTopology::complete(4);
  const std::vector<int> cycle{0, 1, 2};
  const PathBound b = path_formation_lower_bound(g, cycle, 2.0, 1000000);
  // prod_k (1 + 1/(1+k)^2)^(-1) = 2 pi / sinh(pi), and each of the three
  // cycle vertices contributes one factor.
  const double pi = std::numbers::pi;
  const double limit = std::pow(2.0 * pi / std::sinh(pi), 3) / 12.0;
  CHECK(b.first_loop == doctest::Approx(1.0 / 12.0));
  CHECK(b.truncated == doctest::Approx(limit).epsilon(1e-5));
  CHECK(b.tail_mass < 1e-5);
  CHECK(b.lower <= b.truncated);
  CHECK(b.lower > 0.0);

  const PathBound one = path_formation_lower_bound(g, cycle, 1.0, 1000);
  CHECK(one.lower == 0.0);
  CHECK_FALSE(one.diagnostic.empty());

  const GraphTopology k5 = GraphTopology::complete(5);
  CHECK_THROWS_AS(path_formation_lower_bound(k5, std::vector<int>{0, 1, 2, 3}, 2.0, 10), ConfigError);
}

TEST_CASE("path formation frequency is reproducible and close to the bound") {
  const GraphTopology g = GraphTopology::complete(4);
  const std::vector<int> cycle{0, 1, 2};
  const PathFrequency a = path_formation_frequency(g, cycle, 2.0, 20, 20000, 5, 2);
  const PathFrequency b = path_formation_frequency(g, cycle, 2.0, 20, 20000, 5, 1);
  CHECK(a.successes == b.successes);
  const PathBound bound = path_formation_lower_bound(g, cycle, 2.0, 1000000);
  CHECK(a.frequency() >= bound.lower - 4.0 * a.standard_error());
}

TEST_CASE("localization summary") {
  LocalizationConfig c;
  c.alpha = 4.0;
  c.n = 6;
  c.steps = 20000;
  c.runs = 8;
  c.seed = 3;
  const LocalizationResult r = monte_carlo_localization(c);
  CHECK(r.runs.size() == 8);
  std::int64_t total = 0;
  for (auto [k, count] : r.histogram) total += count;
  CHECK(total == 8);
  CHECK(r.total_bound_violations == 0);
  c.threads = 1;
  const LocalizationResult serial = monte_carlo_localization(c);
  for (size_t i = 0; i < r.runs.size(); ++i) {
    CHECK(r.runs[i].seed == serial.runs[i].seed);
    CHECK(r.runs[i].support == serial.runs[i].support);
  }
}
