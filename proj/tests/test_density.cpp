#include <random>
#include <sstream>

#include "doctest.h"
#include "prevmap/density.hpp"
#include "prevmap/grid_io.hpp"
#include "prevmap/scenarios.hpp"

using namespace prevmap;

namespace {

GridDensity grid2x2(double a, double b, double c, double d) {
  return GridDensity(Region::unit(2, 2), {a, b, c, d});
}

GridDensity random_grid(std::mt19937_64& gen, const Region& region) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> v(region.cells());
  for (double& x : v) x = u(gen);
  return GridDensity(region, v);
}

}  // namespace

TEST_CASE("integrate: population grid of the 2x2 scenario totals 200e4") {
  CHECK(integrate(series_population()) == 200e4);
  CHECK(integrate(series_cases()) == 20e4);
}

TEST_CASE("integrate: zero and constant grids") {
  CHECK(integrate(GridDensity::constant(Region::unit(3, 5), 0.0)) == 0.0);
  for (std::size_t n : {1u, 2u, 7u, 64u})
    CHECK(integrate(GridDensity::constant(Region::unit(n, n + 1), 3.25)) == doctest::Approx(3.25).epsilon(1e-14));
}

TEST_CASE("integrate is linear") {
  std::mt19937_64 gen(3);
  const Region region(-1.0, 2.0, 3.0, 2.5, 6, 4, std::vector<bool>(24, true));
  for (int t = 0; t < 20; ++t) {
    const GridDensity d1 = random_grid(gen, region), d2 = random_grid(gen, region);
    const double a = 0.3 * t, b = 2.0 - 0.05 * t;
    CHECK(integrate(combine(a, d1, b, d2)) ==
          doctest::Approx(a * integrate(d1) + b * integrate(d2)).epsilon(1e-13));
  }
}

TEST_CASE("evaluate: constant grid, masked cells and cell arithmetic") {
  const GridDensity c = GridDensity::constant(Region::unit(4, 3), 2.5);
  CHECK(evaluate(c, {0.1, 0.9}) == 2.5);
  CHECK(evaluate(c, {1.0, 1.0}) == 2.5);

  std::vector<bool> mask{true, false, true, true};
  const GridDensity masked(Region(0, 0, 1, 1, 2, 2, mask), {1, 2, 3, 4});
  CHECK(masked[1] == 0.0);
  CHECK(evaluate(masked, {0.75, 0.25}) == 0.0);
  CHECK(evaluate(masked, {0.99, 0.01}) == 0.0);

  const GridDensity g = grid2x2(1, 2, 3, 4);
  CHECK(evaluate(g, {0.75, 0.25}) == 2.0);
}

TEST_CASE("evaluate: boundaries go to the larger index, last cell closed") {
  const GridDensity g = grid2x2(1, 2, 3, 4);
  CHECK(evaluate(g, {0.5, 0.0}) == 2.0);
  CHECK(evaluate(g, {0.0, 0.5}) == 3.0);
  CHECK(evaluate(g, {0.5, 0.5}) == 4.0);
  CHECK(evaluate(g, {1.0, 0.0}) == 2.0);
  CHECK(evaluate(g, {0.0, 1.0}) == 3.0);
}

TEST_CASE("evaluate outside the enclosing rectangle is a domain error") {
  const GridDensity g = grid2x2(1, 2, 3, 4);
  CHECK_THROWS_AS(evaluate(g, {1.0000001, 0.5}), DomainError);
  CHECK_THROWS_AS(evaluate(g, {0.5, -1e-9}), DomainError);
}

TEST_CASE("evaluate agrees with the cell table at every cell center") {
  std::mt19937_64 gen(11);
  const Region region(2.0, -3.0, 5.0, 1.0, 7, 5, std::vector<bool>(35, true));
  const GridDensity d = random_grid(gen, region);
  for (std::size_t iy = 0; iy < 5; ++iy) {
    for (std::size_t ix = 0; ix < 7; ++ix) {
      const Point p{2.0 + 3.0 * (ix + 0.5) / 7.0, -3.0 + 4.0 * (iy + 0.5) / 5.0};
      // brute-force scan for the cell whose bounds contain p
      std::size_t found = 99;
      for (std::size_t c = 0; c < 35; ++c) {
        const double xl = 2.0 + 3.0 * (c % 7) / 7.0, xh = 2.0 + 3.0 * (c % 7 + 1) / 7.0;
        const double yl = -3.0 + 4.0 * (c / 7) / 5.0, yh = -3.0 + 4.0 * (c / 7 + 1) / 5.0;
        if (p.x >= xl && p.x < xh && p.y >= yl && p.y < yh) found = c;
      }
      REQUIRE(found == iy * 7 + ix);
      CHECK(evaluate(d, p) == d[found]);
      CHECK(region.cell_center(found).x == doctest::Approx(p.x));
    }
  }
}

TEST_CASE("grid validation names the offending cell") {
  try {
    GridDensity(Region::unit(3, 2), {1, 2, 3, 4, -1, 6});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("(1, 1)") != std::string::npos);
  }
  CHECK_THROWS_AS(GridDensity(Region::unit(2, 1), {1.0, std::nan("")}), DataError);
  CHECK_THROWS_AS(GridDensity(Region::unit(2, 1), {1.0}), DataError);
  CHECK_THROWS_AS(Region(0, 0, 0, 1, 1, 1, {true}), DataError);
  CHECK_THROWS_AS(Region(0, 0, 1, 1, 1, 2, {false, false}), DataError);
  CHECK_THROWS_AS(Region(0, 0, 1, 1, 2, 2, {true}), DataError);
}

TEST_CASE("rough infection density") {
  const GridDensity pop = grid2x2(100, 50, 10, 7);
  const GridDensity diag = grid2x2(20, 5, 1, 0);
  CHECK(rough_infection_density(pop, diag, 0.0).values() == diag.values());
  CHECK(rough_infection_density(pop, diag, 1.0).values() == pop.values());
  CHECK(rough_infection_density(pop, diag, 0.5)[0] == 60.0);
  for (double g : {0.05, 0.3, 0.77}) {
    const GridDensity r = rough_infection_density(pop, diag, g);
    CHECK(integrate(r) == doctest::Approx(g * integrate(pop) + (1 - g) * integrate(diag)));
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(r[c] >= diag[c]);
      CHECK(r[c] <= pop[c]);
    }
  }
  CHECK_THROWS_AS(rough_infection_density(pop, GridDensity::constant(Region::unit(1, 1), 1), 0.5),
                  ConfigError);
  CHECK_THROWS_AS(rough_infection_density(pop, diag, 1.5), ConfigError);
}

TEST_CASE("sampling density normalization") {
  const GridDensity k = GridDensity::constant(Region::unit(2, 2), 20e4);
  const NormalizedDensity n = sampling_density(k);
  CHECK(n.normalizer == 20e4);
  CHECK(integrate(n.density) == doctest::Approx(1.0).epsilon(1e-12));

  const NormalizedDensity u = sampling_density(GridDensity::constant(Region::unit(5, 3), 4.0));
  for (double v : u.density.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const Scenario s = series_e_scenario(0.5, 0.5);
  CHECK(sampling_density(rough_infection_density(s.pop, s.diag, 0.5)).normalizer == 110e4);

  CHECK_THROWS_AS(sampling_density(GridDensity::constant(Region::unit(2, 2), 0.0)), ComputationError);

  std::mt19937_64 gen(5);
  const Region region(0, 0, 3, 0.5, 9, 4, std::vector<bool>(36, true));
  for (int t = 0; t < 10; ++t)
    CHECK(integrate(sampling_density(random_grid(gen, region)).density) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("local prevalence") {
  const GridDensity pop = grid2x2(320e4, 10, 0, 5);
  CHECK(local_prevalence(pop, pop).values() == std::vector<double>{1, 1, 0, 1});
  CHECK(local_prevalence(grid2x2(0, 0, 0, 0), pop).values() == std::vector<double>(4, 0.0));
  CHECK(local_prevalence(grid2x2(32e4, 1, 0, 0), pop)[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(local_prevalence(grid2x2(1, 11, 0, 0), pop), DataError);
}

TEST_CASE("scenario ordering invariant") {
  Scenario s{grid2x2(10, 10, 10, 10), grid2x2(1, 1, 1, 1), grid2x2(2, 2, 2, 2), 0.5};
  CHECK_NOTHROW(s.validate());
  s.inf = grid2x2(2, 0.5, 2, 2);
  CHECK_THROWS_AS(s.validate(), DataError);
  s.inf = grid2x2(2, 2, 2, 11);
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("grid JSON round trip and rejection") {
  std::vector<bool> mask{true, true, false, true, true, true};
  const GridDensity g(Region(0, 0, 3, 2, 3, 2, mask), {1.5, 0.25, 0, 7, 8, 1e-300});
  const GridDensity back = grid_from_json(grid_to_json(g));
  CHECK(back.region() == g.region());
  CHECK(back.values() == g.values());

  auto j = nlohmann::json::parse(R"({"nx":2,"ny":1,"values":[1,-2]})");
  try {
    grid_from_json(j);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("(1, 0)") != std::string::npos);
  }
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"nx":2,"ny":1,"values":[1]})")), DataError);
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"nx":2,"ny":1,"mask":[true],"values":[1,2]})")),
                  DataError);

  const Scenario s = series_e_scenario(0.3, 0.6);
  const Scenario t = scenario_from_json(scenario_to_json(s));
  CHECK(t.inf.values() == s.inf.values());
  CHECK(t.gamma_check == 0.6);
}
