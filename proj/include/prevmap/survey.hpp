#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prevmap/density.hpp"
#include "prevmap/design.hpp"
#include "prevmap/random.hpp"
#include "prevmap/samplers.hpp"

namespace prevmap {

/// Positions plus the second-stage sample size at each.
struct SamplingPlan {
  PositionDraw draw;
  std::vector<std::int64_t> sizes;
  /// Real-valued sizes before rounding.
  std::vector<double> raw_sizes;
  std::int64_t n_target = 0;
  double eta = 0.0;
  bool fpc_enabled = false;
  /// Persons around each position; only read when fpc_enabled.
  std::vector<double> neighborhood_population;
  /// Non-fatal anomalies (zero sizes raised to 1, clamped weights).
  std::vector<std::string> warnings;

  std::int64_t total_size() const;
};

struct TestOutcome {
  std::vector<std::int64_t> positives;
};

struct VarianceComponents {
  double v0_hat = 0.0;
  double v1_hat = 0.0;
  double v_hat = 0.0;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
};

struct SurveyEstimate {
  double t_hat = 0.0;
  /// Between- and within-position components; absent for estimators that
  /// do not decompose (stratified baseline).
  std::optional<double> v0_hat;
  std::optional<double> v1_hat;
  double v_hat = 0.0;
  Interval ci;
  double alpha = 0.05;
};

/// Nearly-optimal allocation mixed with an equal split:
///   raw_i = (1 - eta) n w_i / sum_j w_j + eta n / r,
///   w_i = sqrt((f_P - rough) / rough) at position i,
/// rounded half away from zero, with zero sizes raised to 1.
SamplingPlan allocate(const PositionDraw& draw, const GridDensity& pop, const GridDensity& rough,
                      std::int64_t n, double eta);

/// Exact optimal allocation from the true infection density:
///   raw_i = n / (r * int g) * g(x_i) / phi(x_i),  g = sqrt(f_I (f_P - f_I)).
/// Sums to n only in expectation over positions.
SamplingPlan allocate_exact_optimal(const PositionDraw& draw, const GridDensity& pop,
                                    const GridDensity& inf, std::int64_t n);

/// Turns on the finite population correction with neighborhood population
/// f_P(x_i) * neighborhood_area.
void enable_fpc(SamplingPlan& plan, const GridDensity& pop, double neighborhood_area);

/// positives_i ~ Binomial(size_i, p_I(x_i)), independent across positions.
TestOutcome simulate_tests(const SamplingPlan& plan, const GridDensity& truth_prevalence, Rng& rng);

/// f_P(x) * positives / size.
double estimate_point_density(double pop_at_xi, std::int64_t size, std::int64_t positives);

/// (1/r) sum_i fhat_i / phi_i.
double estimate_total(const PositionDraw& draw, std::span<const double> point_estimates);

VarianceComponents estimate_variance(const PositionDraw& draw, const SamplingPlan& plan,
                                     std::span<const double> point_estimates,
                                     std::span<const double> pop_at_xi, double t_hat);

/// t_hat -/+ z_{alpha/2} sqrt(v_hat).
Interval confidence_interval(double t_hat, double v_hat, double alpha);

/// (1/n) (int sqrt(f_I (f_P - f_I)))^2, exact on the grid.
double theoretical_minimum_variance(const GridDensity& pop, const GridDensity& inf, std::int64_t n);

// ---------------------------------------------------------------------------
// End-to-end two-stage survey against a simulated ground truth.

/// nearly_optimal: phi from the rough estimate, allocate().
/// oracle: phi from the true f_I, allocate_exact_optimal().
enum class DesignMode { nearly_optimal, oracle };

struct SurveySettings {
  SamplerId sampler = SamplerId::gls;
  std::size_t r = 50;
  std::int64_t n = 10000;
  double eta = 0.0;
  double alpha = 0.05;
  DesignMode mode = DesignMode::nearly_optimal;
  MhOptions mh;
  /// 0 selects kSirPoolFactor * r.
  std::size_t sir_pool = 0;
  bool fpc = false;
  double neighborhood_area = 0.0;
};

/// Scenario with the grids every replication reuses.
struct PreparedScenario {
  explicit PreparedScenario(Scenario s);

  Scenario scenario;
  GridDensity rough;
  GridDensity prevalence;
  double true_total = 0.0;
};

struct SurveyResult {
  SamplingPlan plan;
  TestOutcome outcome;
  std::vector<double> point_estimates;
  SurveyEstimate estimate;
};

SurveyResult conduct_survey(const PreparedScenario& prepared, const DesignPointSet& design,
                            const SurveySettings& settings, Rng& rng);

/// {"t_hat","v0_hat","v1_hat","v_hat","ci":[lo,hi],"alpha",
///  "positions":[[x,y,phi,size,positives],...]}
nlohmann::ordered_json survey_result_to_json(const SurveyResult& result);

}  // namespace prevmap
