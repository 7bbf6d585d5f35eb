#include <cmath>
#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "prevmap/normal.hpp"
#include "prevmap/scenarios.hpp"
#include "prevmap/survey.hpp"

using namespace prevmap;

namespace {

PositionDraw manual_draw(std::vector<Point> pts, std::vector<double> phi) {
  PositionDraw d;
  d.positions = std::move(pts);
  d.phi_values = std::move(phi);
  return d;
}

GridDensity two_cells(double a, double b) { return GridDensity(Region::unit(2, 1), {a, b}); }

std::vector<Point> spread_points(std::size_t r) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < r; ++i) pts.push_back({(i + 0.5) / static_cast<double>(r), 0.37});
  return pts;
}

}  // namespace

TEST_CASE("allocate: constant densities split n equally") {
  const GridDensity pop = GridDensity::constant(Region::unit(3, 3), 100.0);
  const GridDensity rough = GridDensity::constant(Region::unit(3, 3), 10.0);
  for (double eta : {0.0, 0.4, 1.0}) {
    const SamplingPlan p = allocate(manual_draw(spread_points(10), std::vector<double>(10, 1.0)), pop, rough, 1000, eta);
    for (auto s : p.sizes) CHECK(s == 100);
    CHECK(p.warnings.empty());
  }
}

TEST_CASE("allocate: weights follow sqrt((f_P - rough) / rough)") {
  // (100 - 20) / 20 = 4 and (100 - 50) / 50 = 1
  const SamplingPlan p = allocate(manual_draw({{0.25, 0.5}, {0.75, 0.5}}, {1, 1}), two_cells(100, 100),
                                  two_cells(20, 50), 30, 0.0);
  CHECK(p.sizes == std::vector<std::int64_t>{20, 10});
  CHECK(p.raw_sizes[0] == doctest::Approx(20.0));
}

TEST_CASE("allocate: eta = 1 is the equal split, intermediate eta the convex combination") {
  const Scenario s = series_e_scenario(0.3, 0.5);
  const GridDensity rough = rough_infection_density(s.pop, s.diag, 0.5);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < 50; ++i) pts.push_back({(i % 7 + 0.5) / 7.0, (i % 3 + 0.5) / 3.0});
  const PositionDraw d = manual_draw(pts, std::vector<double>(50, 1.0));
  const SamplingPlan full = allocate(d, s.pop, rough, 10000, 1.0);
  for (auto size : full.sizes) CHECK(size == 200);
  const SamplingPlan opt = allocate(d, s.pop, rough, 10000, 0.0);
  const SamplingPlan mix = allocate(d, s.pop, rough, 10000, 0.3);
  double raw_total = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(mix.raw_sizes[i] == doctest::Approx(0.7 * opt.raw_sizes[i] + 0.3 * full.raw_sizes[i]).epsilon(1e-13));
    raw_total += opt.raw_sizes[i];
  }
  CHECK(raw_total == doctest::Approx(10000.0).epsilon(1e-13));
  CHECK(std::llabs(opt.total_size() - 10000) <= 25);
  CHECK(std::llabs(mix.total_size() - 10000) <= 25);
}

TEST_CASE("allocate: rounding, zero sizes and clamped weights") {
  // tiny weight at the second position rounds to 0 and is raised to 1
  const SamplingPlan p = allocate(manual_draw({{0.25, 0.5}, {0.75, 0.5}}, {1, 1}), two_cells(100, 100),
                                  two_cells(1, 99.9999), 10, 0.0);
  CHECK(p.sizes[1] == 1);
  CHECK(p.warnings.size() == 1);

  // rough >= pop: weight clamped to 0 with a warning
  const SamplingPlan q = allocate(manual_draw({{0.25, 0.5}, {0.75, 0.5}}, {1, 1}), two_cells(100, 100),
                                  two_cells(20, 100), 10, 0.0);
  CHECK(q.sizes == std::vector<std::int64_t>{10, 1});
  CHECK(q.warnings.size() == 2);

  // half away from zero: raw sizes 2.5 and 7.5 round to 3 and 8
  const SamplingPlan h = allocate(manual_draw({{0.25, 0.5}, {0.75, 0.5}}, {1, 1}), two_cells(100, 100),
                                  two_cells(100.0 / 10.0, 100.0 / 82.0), 10, 0.0);
  CHECK(h.raw_sizes[0] == doctest::Approx(2.5));
  CHECK(h.sizes == std::vector<std::int64_t>{3, 8});

  CHECK_THROWS_AS(allocate(manual_draw({{0.25, 0.5}}, {1}), two_cells(100, 100), two_cells(0, 1), 10, 0.0),
                  ComputationError);
  CHECK_THROWS_AS(allocate(manual_draw({{0.25, 0.5}}, {1}), two_cells(100, 100), two_cells(1, 1), 10, 1.5),
                  ConfigError);
}

TEST_CASE("simulate_tests: degenerate prevalence and binomial moments") {
  PositionDraw d = manual_draw({{0.25, 0.5}, {0.75, 0.5}}, {1, 1});
  SamplingPlan plan;
  plan.draw = d;
  plan.sizes = {200, 37};
  Rng rng = stream_rng(1, {});
  const GridDensity extreme = two_cells(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const TestOutcome o = simulate_tests(plan, extreme, rng);
    CHECK(o.positives[0] == 0);
    CHECK(o.positives[1] == 37);
  }

  const GridDensity p = two_cells(0.1, 0.1);
  double sum = 0.0, sq = 0.0;
  const int reps = 10000;
  for (int t = 0; t < reps; ++t) {
    const double x = static_cast<double>(simulate_tests(plan, p, rng).positives[0]);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / reps, var = sq / reps - mean * mean;
  CHECK(std::fabs(mean - 20.0) <= 3.0 * std::sqrt(200 * 0.1 * 0.9 / reps));
  CHECK(var == doctest::Approx(18.0).epsilon(0.06));
}

TEST_CASE("point and total estimates") {
  CHECK(estimate_point_density(100, 10, 0) == 0.0);
  CHECK(estimate_point_density(100, 10, 10) == 100.0);
  CHECK(estimate_point_density(100, 10, 3) == doctest::Approx(30.0));
  CHECK_THROWS(estimate_point_density(100, 0, 0));

  const double c = 7.5;
  const std::vector<double> one{c * 0.4};
  CHECK(estimate_total(manual_draw({{0.1, 0.1}}, {0.4}), one) == doctest::Approx(c));

  // phi proportional to f_I and exact point values: every summand is N_I
  const Scenario s = series_e_scenario(0.4, 0.4);
  const NormalizedDensity phi = sampling_density(s.inf);
  std::vector<Point> pts{{0.2, 0.2}, {0.7, 0.3}, {0.1, 0.9}, {0.8, 0.8}};
  std::vector<double> phis, f;
  for (const Point& p : pts) {
    phis.push_back(evaluate(phi.density, p));
    f.push_back(evaluate(s.inf, p));
  }
  CHECK(estimate_total(manual_draw(pts, phis), f) == doctest::Approx(integrate(s.inf)).epsilon(1e-14));
}

TEST_CASE("variance estimator components") {
  const PositionDraw d = manual_draw({{0.25, 0.5}, {0.75, 0.5}, {0.3, 0.1}}, {0.5, 2.0, 0.5});
  SamplingPlan plan;
  plan.draw = d;
  plan.sizes = {10, 20, 40};
  const std::vector<double> pop{100, 100, 100};

  // identical ratios f/phi -> v0 = 0
  const std::vector<double> f{10, 40, 10};
  const VarianceComponents v = estimate_variance(d, plan, f, pop, 20.0);
  CHECK(v.v0_hat == 0.0);
  const double v1 = (10.0 * 90 / (10 * 0.25) + 40.0 * 60 / (20 * 4.0) + 10.0 * 90 / (40 * 0.25)) / 3.0;
  CHECK(v.v1_hat == doctest::Approx(v1));
  CHECK(v.v_hat == doctest::Approx((v.v0_hat + v.v1_hat) / 3.0));

  // zero positives at a position contribute nothing to v1
  const std::vector<double> g{0, 40, 10};
  const double t = (0 + 20 + 20) / 3.0;
  const VarianceComponents w = estimate_variance(d, plan, g, pop, t);
  CHECK(w.v1_hat == doctest::Approx((40.0 * 60 / (20 * 4.0) + 10.0 * 90 / (40 * 0.25)) / 3.0));
  CHECK(w.v0_hat == doctest::Approx(((0 - t) * (0 - t) + 2 * (20 - t) * (20 - t)) / 2.0));

  // finite population correction shrinks v1 by (1 - m / N_i), clamped
  plan.fpc_enabled = true;
  plan.neighborhood_population = {20, 20, 1};
  const VarianceComponents fpc = estimate_variance(d, plan, f, pop, 20.0);
  CHECK(fpc.v1_hat == doctest::Approx((0.5 * 10.0 * 90 / (10 * 0.25) + 0.0 + 0.0) / 3.0));

  const PositionDraw single = manual_draw({{0.5, 0.5}}, {1.0});
  SamplingPlan sp;
  sp.draw = single;
  sp.sizes = {5};
  CHECK_THROWS(estimate_variance(single, sp, std::vector<double>{1}, std::vector<double>{2}, 1.0));
}

TEST_CASE("confidence intervals and the normal quantile") {
  const Interval z = confidence_interval(5.0, 0.0, 0.05);
  CHECK(z.low == 5.0);
  CHECK(z.high == 5.0);
  const Interval ci = confidence_interval(0.0, 1.0, 0.05);
  CHECK(ci.low == doctest::Approx(-1.95996).epsilon(1e-5));
  CHECK(ci.high == doctest::Approx(1.95996).epsilon(1e-5));
  const Interval wide = confidence_interval(0.0, 4.0, 0.32);
  CHECK(std::fabs(wide.high / 2.0 - oracle::normal_quantile(1 - 0.16)) < 1e-4);
  CHECK(std::fabs(wide.high / 2.0 - 0.99446) < 1e-4);
  // the erfc oracle loses digits near p = 1, so the upper tail is checked by symmetry
  for (double p : {1e-12, 1e-9, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.77, 0.97575, 0.999})
    CHECK(std::fabs(normal_quantile(p) - oracle::normal_quantile(p)) < 1e-9);
  CHECK(std::fabs(normal_quantile(1 - 0.0078125) + oracle::normal_quantile(0.0078125)) < 1e-9);
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("theoretical minimum variance") {
  const GridDensity pop = GridDensity::constant(Region::unit(2, 2), 40.0);
  CHECK(theoretical_minimum_variance(pop, GridDensity::constant(Region::unit(2, 2), 0.0), 100) == 0.0);
  CHECK(theoretical_minimum_variance(pop, pop, 100) == 0.0);
  CHECK(theoretical_minimum_variance(pop, GridDensity::constant(Region::unit(2, 2), 20.0), 100) ==
        doctest::Approx(20.0 * 20.0 / 100));
  const Scenario s = series_e_scenario(0.5, 0.5);
  const double v = theoretical_minimum_variance(s.pop, s.inf, 10000);
  CHECK(theoretical_minimum_variance(s.pop, s.inf, 20000) == v / 2.0);
}

TEST_CASE("T-hat does not depend on the kernel scale") {
  const Scenario s = series_e_scenario(0.5, 0.5);
  const GridDensity rough = rough_infection_density(s.pop, s.diag, 0.5);
  const GridDensity rough7 = scaled(rough, 7.0);
  const PreparedScenario prep(s);
  const DesignPointSet design = generate_design(210);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    double t[2];
    int k = 0;
    for (const GridDensity* kernel : {&rough, &rough7}) {
      Rng rng = stream_rng(seed, {});
      const PositionDraw d = gls_sample(*kernel, design, 50, rng);
      const SamplingPlan plan = allocate(d, s.pop, rough, 10000, 0.0);
      const TestOutcome o = simulate_tests(plan, prep.prevalence, rng);
      std::vector<double> f;
      for (std::size_t i = 0; i < d.size(); ++i)
        f.push_back(estimate_point_density(evaluate(s.pop, d.positions[i]), plan.sizes[i], o.positives[i]));
      t[k++] = estimate_total(d, f);
    }
    CHECK(std::memcmp(&t[0], &t[1], sizeof(double)) == 0);
  }
}

TEST_CASE("full pipeline on the 2x2 scenario") {
  const PreparedScenario prep(series_e_scenario(0.5, 0.5));
  const DesignPointSet design = generate_design(210);
  SurveySettings st;
  const int reps = 400;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < reps; ++k) {
    Rng rng = stream_rng(77, {static_cast<std::uint64_t>(k)});
    const SurveyResult res = conduct_survey(prep, design, st, rng);
    REQUIRE(res.plan.sizes.size() == 50);
    CHECK(res.estimate.ci.low <= res.estimate.t_hat);
    CHECK(res.estimate.t_hat <= res.estimate.ci.high);
    for (std::size_t i = 0; i < 50; ++i) CHECK(res.outcome.positives[i] <= res.plan.sizes[i]);
    sum += res.estimate.t_hat;
    sq += res.estimate.t_hat * res.estimate.t_hat;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  CHECK(std::fabs(mean - prep.true_total) <= 4.0 * se);
}

TEST_CASE("survey result JSON layout") {
  const PreparedScenario prep(series_e_scenario(0.5, 0.5));
  Rng rng = stream_rng(3, {});
  SurveySettings st;
  st.r = 4;
  st.n = 100;
  const auto j = survey_result_to_json(conduct_survey(prep, generate_design(21), st, rng));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"t_hat", "v0_hat", "v1_hat", "v_hat", "ci", "alpha", "positions"});
  CHECK(j["positions"].size() == 4);
  CHECK(j["positions"][0].size() == 5);
}
