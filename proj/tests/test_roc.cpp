#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "cadeval/roc.hpp"
#include "oracles.hpp"

using namespace cadeval;

namespace {

std::vector<ScoredCase> random_cases(rng::Stream& rng, std::size_t n, int score_levels) {
  std::vector<ScoredCase> cases(n);
  for (auto& c : cases) {
    c.score = static_cast<double>(rng.next_index(static_cast<std::uint64_t>(score_levels))) /
              static_cast<double>(score_levels - 1);
    c.label = static_cast<int>(rng.next_index(2));
  }
  // Guarantee both classes.
  cases[0].label = 1;
  cases[n - 1].label = 0;
  return cases;
}

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("percentile by linear interpolation") {
  CHECK(percentile({1, 2, 3, 4}, 50) == 2.5);
  CHECK(percentile({4, 3, 2, 1}, 0) == 1.0);
  CHECK(percentile({4, 3, 2, 1}, 100) == 4.0);
  CHECK(percentile({1, 2, 3, 4}, 25) == 1.75);
  CHECK(percentile({5}, 37.5) == 5.0);
  CHECK_THROWS_AS(percentile({}, 50), InputError);
  CHECK_THROWS_AS(percentile({1, 2}, -1), ConfigError);
  CHECK_THROWS_AS(percentile({1, 2}, 101), ConfigError);
}

TEST_CASE("central interval endpoints") {
  std::vector<double> v(101);
  std::iota(v.begin(), v.end(), 0.0);  // 0..100
  const auto [lo, hi] = central_interval(v, 95.0);
  CHECK(lo == 2.5);
  CHECK(hi == 97.5);
  const auto [l2, h2] = central_interval(v, 50.0);
  CHECK(l2 == 25.0);
  CHECK(h2 == 75.0);
}

TEST_CASE("bootstrap config validation") {
  CHECK_NOTHROW(validate(BootstrapConfig{}));
  CHECK_THROWS_AS(validate(BootstrapConfig{0, 95.0, 0}), ConfigError);
  CHECK_THROWS_AS(validate(BootstrapConfig{-5, 95.0, 0}), ConfigError);
  CHECK_THROWS_AS(validate(BootstrapConfig{100, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS(validate(BootstrapConfig{100, 100.0, 0}), ConfigError);
}

TEST_CASE("draw_multiplicities partitions n draws") {
  rng::Stream s(99, 3);
  std::vector<std::uint32_t> mult;
  draw_multiplicities(s, 57, mult);
  REQUIRE(mult.size() == 57);
  CHECK(std::accumulate(mult.begin(), mult.end(), 0u) == 57u);
  rng::Stream again(99, 3);
  std::vector<std::uint32_t> repeat;
  draw_multiplicities(again, 57, repeat);
  CHECK(mult == repeat);
}

TEST_CASE("roc curve on perfect separation") {
  std::vector<ScoredCase> cases{{0.9, 1}, {0.8, 1}, {0.2, 0}, {0.1, 0}};
  const RocCurve curve = roc_curve(cases);
  CHECK(curve.auc == 1.0);
  REQUIRE(curve.points.size() == 5);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(std::isinf(curve.points.front().threshold));
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);
  // After the two positives: (0, 1).
  CHECK(curve.points[2].fpr == 0.0);
  CHECK(curve.points[2].tpr == 1.0);
}

TEST_CASE("roc curve with all scores tied is the diagonal") {
  std::vector<ScoredCase> cases{{0.5, 1}, {0.5, 0}, {0.5, 1}, {0.5, 0}};
  const RocCurve curve = roc_curve(cases);
  CHECK(curve.auc == 0.5);
  // One tie group: (0,0) then (1,1).
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[1].fpr == 1.0);
  CHECK(curve.points[1].tpr == 1.0);
  CHECK(curve.points[1].threshold == 0.5);
}

TEST_CASE("reversed scores give auc 0") {
  std::vector<ScoredCase> cases{{0.1, 1}, {0.2, 1}, {0.8, 0}, {0.9, 0}};
  CHECK(roc_curve(cases).auc == 0.0);
}

TEST_CASE("roc curve rejects bad cases with the offending index") {
  std::vector<ScoredCase> bad_score{{1.5, 1}, {0.2, 0}};
  CHECK_THROWS_WITH_AS(roc_curve(bad_score), doctest::Contains("case 0"), InputError);
  std::vector<ScoredCase> bad_label{{0.5, 1}, {0.2, 2}};
  CHECK_THROWS_WITH_AS(roc_curve(bad_label), doctest::Contains("case 1"), InputError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScoredCase> nan_score{{nan, 1}, {0.2, 0}};
  CHECK_THROWS_AS(roc_curve(nan_score), InputError);
}

TEST_CASE("roc curve names the missing class") {
  std::vector<ScoredCase> only_pos{{0.5, 1}, {0.7, 1}};
  CHECK_THROWS_WITH_AS(roc_curve(only_pos), doctest::Contains("negative"), DegenerateInputError);
  std::vector<ScoredCase> only_neg{{0.5, 0}};
  CHECK_THROWS_WITH_AS(roc_curve(only_neg), doctest::Contains("positive"), DegenerateInputError);
  CHECK_THROWS_AS(roc_curve({}), DegenerateInputError);
}

TEST_CASE("auc equals the pairwise estimator, ties included") {
  rng::Stream rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.next_index(120);
    const int levels = 2 + static_cast<int>(rng.next_index(20));
    const auto cases = random_cases(rng, n, levels);
    const RocCurve curve = roc_curve(cases);
    CHECK(curve.auc == doctest::Approx(oracle::mann_whitney_auc(cases)).epsilon(1e-9));
    CHECK(curve.auc == doctest::Approx(trapezoid_auc(curve.points)).epsilon(1e-12));
  }
}

TEST_CASE("roc points are monotone and anchored") {
  rng::Stream rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cases = random_cases(rng, 2 + rng.next_index(60), 8);
    const RocCurve curve = roc_curve(cases);
    CHECK(curve.points.front().fpr == 0.0);
    CHECK(curve.points.front().tpr == 0.0);
    CHECK(curve.points.back().fpr == 1.0);
    CHECK(curve.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
      CHECK(curve.points[i].threshold < curve.points[i - 1].threshold);
    }
  }
}

TEST_CASE("auc is invariant under strictly increasing score transforms") {
  rng::Stream rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto cases = random_cases(rng, 2 + rng.next_index(80), 10);
    const double before = roc_curve(cases).auc;
    // x^2 and sqrt(x) map [0,1] to [0,1], strictly increasing.
    auto squared = cases;
    for (auto& c : squared) c.score = c.score * c.score;
    auto rooted = cases;
    for (auto& c : rooted) c.score = std::sqrt(c.score);
    CHECK(same_bits(roc_curve(squared).auc, before));
    CHECK(same_bits(roc_curve(rooted).auc, before));
  }
}

TEST_CASE("bootstrap on perfect separation collapses to [1, 1]") {
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 30; ++i) cases.push_back({0.8 + 0.001 * i, 1});
  for (int i = 0; i < 30; ++i) cases.push_back({0.1 + 0.001 * i, 0});
  const AucSummary s = auc_bootstrap(cases, {500, 95.0, 42});
  CHECK(s.auc == 1.0);
  CHECK(s.lo == 1.0);
  CHECK(s.hi == 1.0);
  CHECK(s.replicates == 500);
  CHECK(s.seed == 42);
}

TEST_CASE("bootstrap is deterministic and order-independent in the replicate stream") {
  rng::Stream rng(24);
  const auto cases = random_cases(rng, 80, 12);
  const AucSummary a = auc_bootstrap(cases, {2000, 95.0, 7});
  const AucSummary b = auc_bootstrap(cases, {2000, 95.0, 7});
  CHECK(same_bits(a.auc, b.auc));
  CHECK(same_bits(a.lo, b.lo));
  CHECK(same_bits(a.hi, b.hi));
  CHECK(a.degenerate_redraws == b.degenerate_redraws);
  const AucSummary c = auc_bootstrap(cases, {2000, 95.0, 8});
  // A different seed moves at least one endpoint.
  CHECK((!same_bits(a.lo, c.lo) || !same_bits(a.hi, c.hi)));
}

TEST_CASE("bootstrap interval brackets the point estimate") {
  rng::Stream rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cases = random_cases(rng, 30 + rng.next_index(100), 10);
    const AucSummary s = auc_bootstrap(cases, {400, 95.0, static_cast<std::uint64_t>(trial)});
    CHECK(s.lo <= s.hi);
    CHECK(s.lo >= 0.0);
    CHECK(s.hi <= 1.0);
  }
}

TEST_CASE("single-class replicates are redrawn, not dropped") {
  // With one positive among four cases, many replicates miss the positive
  // and must be redrawn; the summary still reports a valid interval.
  std::vector<ScoredCase> cases{{0.9, 1}, {0.4, 0}, {0.3, 0}, {0.2, 0}};
  const AucSummary s = auc_bootstrap(cases, {1000, 95.0, 5});
  CHECK(s.degenerate_redraws > 0);
  CHECK(s.lo <= s.hi);
  CHECK(s.auc == 1.0);
  CHECK(s.lo == 1.0);  // every kept replicate separates perfectly
  CHECK(s.hi == 1.0);
}

TEST_CASE("wider samples tighten the interval") {
  // Same generative process, two sample sizes. For these fixed seeds the
  // larger cohort must give a narrower 95% interval.
  auto cohort = [](std::size_t n, std::uint64_t seed) {
    rng::Stream rng(seed);
    std::vector<ScoredCase> cases;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(rng.next_index(2));
      const double base = label ? 0.65 : 0.35;
      double s = base + 0.3 * (rng.next_double() - 0.5);
      cases.push_back({std::clamp(s, 0.0, 1.0), label});
    }
    cases[0].label = 1;
    cases[1].label = 0;
    return cases;
  };
  const AucSummary small = auc_bootstrap(cohort(100, 31), {2000, 95.0, 1});
  const AucSummary large = auc_bootstrap(cohort(400, 32), {2000, 95.0, 1});
  CHECK(large.hi - large.lo < small.hi - small.lo);
}

TEST_CASE("roc_bootstrap reproduces auc_bootstrap and adds a band") {
  rng::Stream rng(26);
  const auto cases = random_cases(rng, 60, 10);
  const BootstrapConfig cfg{800, 95.0, 11};
  const auto grid = default_fpr_grid();
  const RocBootstrapResult r = roc_bootstrap(cases, cfg, grid);
  const AucSummary plain = auc_bootstrap(cases, cfg);
  CHECK(same_bits(r.auc.auc, plain.auc));
  CHECK(same_bits(r.auc.lo, plain.lo));
  CHECK(same_bits(r.auc.hi, plain.hi));
  REQUIRE(r.band.grid.size() == 101);
  CHECK(r.band.grid.front() == 0.0);
  CHECK(r.band.grid.back() == 1.0);
  REQUIRE(r.band.bounds.size() == 101);
  for (std::size_t g = 0; g < r.band.bounds.size(); ++g) {
    const auto [lo, hi] = r.band.bounds[g];
    CHECK(lo <= hi);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
  }
  // At FPR 1.0 every replicate has TPR 1.0.
  CHECK(r.band.bounds.back().first == 1.0);
  CHECK(r.band.bounds.back().second == 1.0);
  // Band upper bounds are nondecreasing along the grid for step curves.
  for (std::size_t g = 1; g < r.band.bounds.size(); ++g) {
    CHECK(r.band.bounds[g].second >= r.band.bounds[g - 1].second);
    CHECK(r.band.bounds[g].first >= r.band.bounds[g - 1].first);
  }
}

TEST_CASE("default fpr grid is 0.00 to 1.00 by 0.01") {
  const auto grid = default_fpr_grid();
  REQUIRE(grid.size() == 101);
  CHECK(grid[0] == 0.0);
  CHECK(grid[50] == 0.5);
  CHECK(grid[100] == 1.0);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("trapezoid matches hand-computed areas") {
  std::vector<RocPoint> tri{{std::numeric_limits<double>::infinity(), 0.0, 0.0},
                            {0.5, 0.5, 1.0},
                            {0.0, 1.0, 1.0}};
  // 0.5 * (0 + 1) / 2 + 0.5 * 1 = 0.75.
  CHECK(trapezoid_auc(tri) == 0.75);
  std::vector<RocPoint> diag{{std::numeric_limits<double>::infinity(), 0.0, 0.0},
                             {0.0, 1.0, 1.0}};
  CHECK(trapezoid_auc(diag) == 0.5);
}
