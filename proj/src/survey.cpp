#include "prevmap/survey.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prevmap/normal.hpp"

namespace prevmap {

namespace {

std::string at_position(std::size_t i) { return "position " + std::to_string(i); }

/// Rounds raw sizes half away from zero; zeros become 1 with a warning.
void round_sizes(SamplingPlan& plan) {
  plan.sizes.resize(plan.raw_sizes.size());
  for (std::size_t i = 0; i < plan.raw_sizes.size(); ++i) {
    auto size = static_cast<std::int64_t>(std::round(plan.raw_sizes[i]));
    if (size < 1) {
      plan.warnings.push_back(at_position(i) + ": size rounded to 0, raised to 1");
      size = 1;
    }
    plan.sizes[i] = size;
  }
}

void check_allocation_inputs(const PositionDraw& draw, std::int64_t n, double eta) {
  if (draw.size() == 0) throw ConfigError("allocation needs at least one position");
  if (n < 1) throw ConfigError("total sample size n must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
}

}  // namespace

std::int64_t SamplingPlan::total_size() const {
  return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
}

SamplingPlan allocate(const PositionDraw& draw, const GridDensity& pop, const GridDensity& rough,
                      std::int64_t n, double eta) {
  check_allocation_inputs(draw, n, eta);
  const std::size_t r = draw.size();
  SamplingPlan plan;
  plan.draw = draw;
  plan.n_target = n;
  plan.eta = eta;

  std::vector<double> w(r);
  double w_sum = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double fp = evaluate(pop, draw.positions[i]);
    const double fr = evaluate(rough, draw.positions[i]);
    if (!(fr > 0.0))
      throw ComputationError("allocation: rough infection density is 0 at " + at_position(i));
    if (fr >= fp) {
      plan.warnings.push_back(at_position(i) + ": rough estimate >= population, weight clamped to 0");
      w[i] = 0.0;
    } else {
      w[i] = std::sqrt((fp - fr) / fr);
    }
    w_sum += w[i];
  }

  const double nd = static_cast<double>(n);
  const double equal = nd / static_cast<double>(r);
  plan.raw_sizes.resize(r);
  if (!(w_sum > 0.0)) {
    plan.warnings.emplace_back("allocation: every weight is 0, using an equal split");
    std::fill(plan.raw_sizes.begin(), plan.raw_sizes.end(), equal);
  } else {
    for (std::size_t i = 0; i < r; ++i)
      plan.raw_sizes[i] = (1.0 - eta) * nd * (w[i] / w_sum) + eta * equal;
  }
  round_sizes(plan);
  return plan;
}

SamplingPlan allocate_exact_optimal(const PositionDraw& draw, const GridDensity& pop,
                                    const GridDensity& inf, std::int64_t n) {
  check_allocation_inputs(draw, n, 0.0);
  const std::size_t r = draw.size();
  SamplingPlan plan;
  plan.draw = draw;
  plan.n_target = n;

  std::vector<double> g(pop.cells());
  double g_integral = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    g[c] = std::sqrt(std::max(0.0, inf[c] * (pop[c] - inf[c])));
    g_integral += g[c];
  }
  g_integral *= pop.region().cell_area();

  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(r);
  plan.raw_sizes.resize(r);
  if (!(g_integral > 0.0)) {
    plan.warnings.emplace_back("exact allocation: integral of g is 0, using an equal split");
    std::fill(plan.raw_sizes.begin(), plan.raw_sizes.end(), nd / rd);
  } else {
    for (std::size_t i = 0; i < r; ++i) {
      const double gi = g[pop.region().cell_of(draw.positions[i])];
      plan.raw_sizes[i] = nd / (rd * g_integral) * gi / draw.phi_values[i];
    }
  }
  round_sizes(plan);
  return plan;
}

void enable_fpc(SamplingPlan& plan, const GridDensity& pop, double neighborhood_area) {
  if (!(neighborhood_area > 0.0)) throw ConfigError("FPC needs a positive neighborhood area");
  plan.fpc_enabled = true;
  plan.neighborhood_population.resize(plan.draw.size());
  for (std::size_t i = 0; i < plan.draw.size(); ++i)
    plan.neighborhood_population[i] = evaluate(pop, plan.draw.positions[i]) * neighborhood_area;
}

TestOutcome simulate_tests(const SamplingPlan& plan, const GridDensity& truth_prevalence, Rng& rng) {
  TestOutcome out;
  out.positives.resize(plan.sizes.size());
  for (std::size_t i = 0; i < plan.sizes.size(); ++i) {
    const double p = evaluate(truth_prevalence, plan.draw.positions[i]);
    const std::int64_t m = plan.sizes[i];
    if (p <= 0.0) {
      out.positives[i] = 0;
    } else if (p >= 1.0) {
      out.positives[i] = m;
    } else {
      std::binomial_distribution<std::int64_t> bin(m, p);
      out.positives[i] = bin(rng);
    }
  }
  return out;
}

double estimate_point_density(double pop_at_xi, std::int64_t size, std::int64_t positives) {
  if (size < 1) throw ComputationError("point estimate undefined for sample size 0");
  if (positives < 0 || positives > size)
    throw ComputationError("positives must lie in [0, size]");
  return pop_at_xi * static_cast<double>(positives) / static_cast<double>(size);
}

double estimate_total(const PositionDraw& draw, std::span<const double> point_estimates) {
  if (point_estimates.size() != draw.size() || draw.size() == 0)
    throw ConfigError("estimate_total: need one point estimate per position");
  double sum = 0.0;
  for (std::size_t i = 0; i < draw.size(); ++i) sum += point_estimates[i] / draw.phi_values[i];
  return sum / static_cast<double>(draw.size());
}

VarianceComponents estimate_variance(const PositionDraw& draw, const SamplingPlan& plan,
                                     std::span<const double> point_estimates,
                                     std::span<const double> pop_at_xi, double t_hat) {
  const std::size_t r = draw.size();
  if (r < 2) throw ComputationError("variance estimate needs at least 2 positions");
  if (point_estimates.size() != r || pop_at_xi.size() != r || plan.sizes.size() != r)
    throw ConfigError("estimate_variance: inconsistent lengths");

  double ss = 0.0;
  double within = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double phi = draw.phi_values[i];
    const double f = point_estimates[i];
    const double dev = f / phi - t_hat;
    ss += dev * dev;

    double sampled_fraction = 0.0;
    const auto m = static_cast<double>(plan.sizes[i]);
    if (plan.fpc_enabled) {
      const double pool = plan.neighborhood_population[i];
      sampled_fraction = pool > 0.0 ? std::clamp(m / pool, 0.0, 1.0) : 1.0;
    }
    within += (1.0 - sampled_fraction) * f * (pop_at_xi[i] - f) / (m * phi * phi);
  }
  VarianceComponents v;
  const double rd = static_cast<double>(r);
  v.v0_hat = ss / (rd - 1.0);
  v.v1_hat = std::max(0.0, within / rd);
  v.v_hat = (v.v0_hat + v.v1_hat) / rd;
  return v;
}

Interval confidence_interval(double t_hat, double v_hat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (v_hat < 0.0) throw ComputationError("negative variance estimate");
  const double half = upper_half_alpha_quantile(alpha) * std::sqrt(v_hat);
  return {t_hat - half, t_hat + half};
}

double theoretical_minimum_variance(const GridDensity& pop, const GridDensity& inf, std::int64_t n) {
  if (!pop.same_grid(inf)) throw ConfigError("theoretical_minimum_variance: grid mismatch");
  if (n < 1) throw ConfigError("n must be positive");
  double g = 0.0;
  for (std::size_t c = 0; c < pop.cells(); ++c) {
    if (inf[c] > pop[c] * (1.0 + 1e-12)) throw DataError("f_I exceeds f_P");
    g += std::sqrt(std::max(0.0, inf[c] * (pop[c] - inf[c])));
  }
  g *= pop.region().cell_area();
  return g * g / static_cast<double>(n);
}

PreparedScenario::PreparedScenario(Scenario s)
    : scenario((s.validate(), std::move(s))),
      rough(rough_infection_density(scenario.pop, scenario.diag, scenario.gamma_check)),
      prevalence(local_prevalence(scenario.inf, scenario.pop)),
      true_total(integrate(scenario.inf)) {}

SurveyResult conduct_survey(const PreparedScenario& prepared, const DesignPointSet& design,
                            const SurveySettings& settings, Rng& rng) {
  const Scenario& sc = prepared.scenario;
  const GridDensity& kernel =
      settings.mode == DesignMode::oracle ? sc.inf : prepared.rough;

  PositionDraw draw;
  switch (settings.sampler) {
    case SamplerId::gls: draw = gls_sample(kernel, design, settings.r, rng); break;
    case SamplerId::sir:
      draw = sir_sample(kernel, settings.r,
                        settings.sir_pool ? settings.sir_pool : kSirPoolFactor * settings.r, rng);
      break;
    case SamplerId::mh: draw = mh_sample(kernel, design, settings.r, settings.mh, rng); break;
  }

  SurveyResult res;
  res.plan = settings.mode == DesignMode::oracle
                 ? allocate_exact_optimal(draw, sc.pop, sc.inf, settings.n)
                 : allocate(draw, sc.pop, prepared.rough, settings.n, settings.eta);
  if (settings.fpc) enable_fpc(res.plan, sc.pop, settings.neighborhood_area);
  res.outcome = simulate_tests(res.plan, prepared.prevalence, rng);

  const std::size_t r = draw.size();
  std::vector<double> pop_at(r);
  res.point_estimates.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    pop_at[i] = evaluate(sc.pop, draw.positions[i]);
    res.point_estimates[i] =
        estimate_point_density(pop_at[i], res.plan.sizes[i], res.outcome.positives[i]);
  }
  SurveyEstimate& est = res.estimate;
  est.alpha = settings.alpha;
  est.t_hat = estimate_total(res.plan.draw, res.point_estimates);
  const VarianceComponents v =
      estimate_variance(res.plan.draw, res.plan, res.point_estimates, pop_at, est.t_hat);
  est.v0_hat = v.v0_hat;
  est.v1_hat = v.v1_hat;
  est.v_hat = v.v_hat;
  est.ci = confidence_interval(est.t_hat, est.v_hat, settings.alpha);
  return res;
}

nlohmann::ordered_json survey_result_to_json(const SurveyResult& result) {
  nlohmann::ordered_json j;
  const SurveyEstimate& e = result.estimate;
  j["t_hat"] = e.t_hat;
  j["v0_hat"] = e.v0_hat ? nlohmann::ordered_json(*e.v0_hat) : nlohmann::ordered_json(nullptr);
  j["v1_hat"] = e.v1_hat ? nlohmann::ordered_json(*e.v1_hat) : nlohmann::ordered_json(nullptr);
  j["v_hat"] = e.v_hat;
  j["ci"] = {e.ci.low, e.ci.high};
  j["alpha"] = e.alpha;
  auto positions = nlohmann::ordered_json::array();
  const SamplingPlan& plan = result.plan;
  for (std::size_t i = 0; i < plan.draw.size(); ++i) {
    positions.push_back({plan.draw.positions[i].x, plan.draw.positions[i].y,
                         plan.draw.phi_values[i], plan.sizes[i], result.outcome.positives[i]});
  }
  j["positions"] = std::move(positions);
  return j;
}

}  // namespace prevmap
