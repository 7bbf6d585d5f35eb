#include <cmath>
#include <numeric>

#include "doctest.h"
#include "prevmap/scenarios.hpp"
#include "prevmap/stratified.hpp"

using namespace prevmap;

namespace {

StratumSpec stratum(const std::string& id, double population, double p) {
  StratumSpec s;
  s.id = id;
  s.population = population;
  s.rough_prevalence = p;
  return s;
}

std::int64_t sum(const std::vector<std::int64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::int64_t{0});
}

}  // namespace

TEST_CASE("Neyman allocation examples") {
  const double p2 = (1.0 - std::sqrt(0.75)) / 2.0;  // sqrt(p2 (1 - p2)) = 1/4
  auto a = neyman_allocate({stratum("a", 1000, 0.5), stratum("b", 1000, p2)}, 300);
  CHECK(a.sizes == std::vector<std::int64_t>{200, 100});
  CHECK(a.warnings.empty());

  auto same = neyman_allocate({stratum("a", 50, 0.2), stratum("b", 50, 0.2), stratum("c", 50, 0.2)}, 99);
  CHECK(same.sizes == std::vector<std::int64_t>{33, 33, 33});

  auto weighted = neyman_allocate({stratum("a", 1, 0.5), stratum("b", 2, 0.5), stratum("c", 3, 0.5)}, 60);
  CHECK(weighted.sizes == std::vector<std::int64_t>{10, 20, 30});
}

TEST_CASE("Neyman allocation: zero spread, empty strata and fallback") {
  auto z = neyman_allocate({stratum("a", 100, 0.0), stratum("b", 100, 0.3), stratum("empty", 0, 0.3)}, 50);
  CHECK(z.sizes == std::vector<std::int64_t>{2, 48, 0});

  auto flat = neyman_allocate({stratum("a", 100, 0.0), stratum("b", 300, 1.0)}, 40);
  CHECK(flat.sizes == std::vector<std::int64_t>{10, 30});
  CHECK(flat.warnings.size() == 1);

  CHECK_THROWS_AS(neyman_allocate({stratum("a", 0, 0.0)}, 10), ComputationError);
  CHECK_THROWS_AS(neyman_allocate({stratum("a", 10, 0.0), stratum("b", 10, 0.5)}, 2), ConfigError);
  CHECK_THROWS_AS(neyman_allocate({}, 10), ConfigError);
}

TEST_CASE("apportion: exact totals, bounded error, largest remainder") {
  CHECK(apportion({1, 1, 1}, 10) == std::vector<std::int64_t>{4, 3, 3});
  CHECK(apportion({0.5, 0.3, 0.2}, 7) == std::vector<std::int64_t>{4, 2, 1});
  CHECK(apportion({0, 0}, 5) == std::vector<std::int64_t>{0, 0});
  Rng rng = stream_rng(11, {});
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + static_cast<std::size_t>(uniform01(rng) * 12);
    std::vector<double> w(k);
    for (auto& x : w) x = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
    if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
    const auto n = static_cast<std::int64_t>(uniform01(rng) * 500);
    const auto out = apportion(w, n);
    CHECK(sum(out) == n);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t h = 0; h < k; ++h) {
      CHECK(std::fabs(static_cast<double>(out[h]) - static_cast<double>(n) * w[h] / total) < 1.0);
      if (w[h] == 0.0) CHECK(out[h] == 0);
    }
  }
}

TEST_CASE("stratified estimate examples") {
  const std::vector<StratumSpec> s{stratum("a", 1000, 0.1), stratum("b", 500, 0.1)};
  const SurveyEstimate e = stratified_estimate(s, {100, 50}, {10, 25}, 0.05);
  CHECK(e.t_hat == doctest::Approx(1000 * 0.1 + 500 * 0.5));
  CHECK(e.v_hat == doctest::Approx(1e6 * 0.09 / 100 + 250000 * 0.25 / 50));
  CHECK(e.ci.high - e.t_hat == doctest::Approx(1.959963985 * std::sqrt(e.v_hat)));
  CHECK_FALSE(e.v0_hat.has_value());

  const SurveyEstimate f = stratified_estimate(s, {100, 50}, {10, 25}, 0.05, true);
  CHECK(f.v_hat == doctest::Approx(1e6 * 0.9 * 0.09 / 100 + 250000 * 0.9 * 0.25 / 50));

  const SurveyEstimate all = stratified_estimate({stratum("a", 10, 0.5)}, {10}, {4}, 0.05, true);
  CHECK(all.v_hat == 0.0);

  // empty strata are skipped, zero-size populated strata are an error
  CHECK(stratified_estimate({stratum("a", 100, 0.1), stratum("e", 0, 0)}, {10, 0}, {5, 0}, 0.05).t_hat == 50.0);
  CHECK_THROWS_AS(stratified_estimate(s, {100, 0}, {10, 0}, 0.05), ConfigError);
  CHECK_THROWS_AS(stratified_estimate(s, {100, 50}, {101, 0}, 0.05), ComputationError);
}

TEST_CASE("splitting a stratum into identical halves leaves the estimate unchanged") {
  const SurveyEstimate whole = stratified_estimate({stratum("a", 800, 0.2)}, {40}, {12}, 0.05);
  const SurveyEstimate halves =
      stratified_estimate({stratum("a1", 400, 0.2), stratum("a2", 400, 0.2)}, {20, 20}, {6, 6}, 0.05);
  CHECK(halves.t_hat == doctest::Approx(whole.t_hat));
  CHECK(halves.v_hat == doctest::Approx(whole.v_hat));
}

TEST_CASE("build_strata on the 2x2 layout") {
  const Scenario sc = series_e_scenario(0.3, 0.5);
  const GridDensity rough = rough_infection_density(sc.pop, sc.diag, 0.5);
  const auto strata = build_strata({"bl", "br", "tl", "tr"}, {0, 1, 2, 3}, sc.pop, rough);
  REQUIRE(strata.size() == 4);
  double total = 0.0;
  for (std::size_t h = 0; h < 4; ++h) {
    CHECK(strata[h].cells == std::vector<std::size_t>{h});
    CHECK(strata[h].population == doctest::Approx(sc.pop[h] / 4));
    CHECK(strata[h].rough_prevalence == doctest::Approx(rough[h] / sc.pop[h]));
    total += strata[h].population;
  }
  CHECK(total == doctest::Approx(integrate(sc.pop)));

  const auto two = build_strata({"bottom", "top"}, {0, 0, 1, 1}, sc.pop, rough);
  CHECK(two[0].population == doctest::Approx((sc.pop[0] + sc.pop[1]) / 4));

  CHECK_THROWS_AS(build_strata({"a"}, {0, 0, -1, 0}, sc.pop, rough), DataError);
  CHECK_THROWS_AS(build_strata({"a"}, {0, 0, 1, 0}, sc.pop, rough), DataError);
  CHECK_THROWS_AS(build_strata({"a"}, {0, 0, 0}, sc.pop, rough), ConfigError);
}

TEST_CASE("stratified sampling on the 2x2 layout is unbiased") {
  const Scenario sc = series_e_scenario(0.3, 0.5);
  const GridDensity rough = rough_infection_density(sc.pop, sc.diag, 0.5);
  const auto strata = build_strata({"bl", "br", "tl", "tr"}, {0, 1, 2, 3}, sc.pop, rough);
  const auto alloc = neyman_allocate(strata, 10000);
  CHECK(sum(alloc.sizes) == 10000);
  const auto prev = stratum_prevalence(strata, sc.inf);
  double truth = 0.0;
  for (std::size_t h = 0; h < 4; ++h) {
    CHECK(prev[h] == doctest::Approx(sc.inf[h] / sc.pop[h]));
    truth += prev[h] * strata[h].population;
  }
  CHECK(truth == doctest::Approx(integrate(sc.inf)));

  Rng rng = stream_rng(5, {});
  const int reps = 2000;
  double s = 0.0, sq = 0.0, vsum = 0.0;
  for (int k = 0; k < reps; ++k) {
    const auto pos = simulate_stratified_tests(alloc.sizes, prev, rng);
    const SurveyEstimate e = stratified_estimate(strata, alloc.sizes, pos, 0.05);
    s += e.t_hat;
    sq += e.t_hat * e.t_hat;
    vsum += e.v_hat;
  }
  const double mean = s / reps;
  const double var = sq / reps - mean * mean;
  CHECK(std::fabs(mean - truth) <= 4.0 * std::sqrt(var / reps));
  CHECK(vsum / reps == doctest::Approx(var).epsilon(0.1));
}

TEST_CASE("simulate_stratified_tests edge prevalences") {
  Rng rng = stream_rng(2, {});
  const auto pos = simulate_stratified_tests({5, 7, 0}, {0.0, 1.0, 0.5}, rng);
  CHECK(pos == std::vector<std::int64_t>{0, 7, 0});
}
