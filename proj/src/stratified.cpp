#include "prevmap/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prevmap/normal.hpp"

namespace prevmap {

std::vector<StratumSpec> build_strata(const std::vector<std::string>& ids,
                                      const std::vector<int>& cell_labels, const GridDensity& pop,
                                      const GridDensity& rough) {
  if (cell_labels.size() != pop.cells()) throw ConfigError("stratum labels do not cover the grid");
  if (!pop.same_grid(rough)) throw ConfigError("build_strata: grid mismatch");
  std::vector<StratumSpec> strata(ids.size());
  std::vector<double> rough_mass(ids.size(), 0.0);
  for (std::size_t h = 0; h < ids.size(); ++h) strata[h].id = ids[h];
  const double area = pop.region().cell_area();
  for (std::size_t c = 0; c < cell_labels.size(); ++c) {
    const int label = cell_labels[c];
    const bool inside = pop.region().inside(c);
    if (label < 0) {
      if (inside) throw DataError("cell " + std::to_string(c) + " is inside the region but has no stratum");
      continue;
    }
    if (static_cast<std::size_t>(label) >= ids.size())
      throw DataError("cell " + std::to_string(c) + " has unknown stratum label");
    if (!inside) throw DataError("cell " + std::to_string(c) + " is outside the region but labeled");
    auto& s = strata[static_cast<std::size_t>(label)];
    s.cells.push_back(c);
    s.population += pop[c] * area;
    rough_mass[static_cast<std::size_t>(label)] += rough[c] * area;
  }
  for (std::size_t h = 0; h < strata.size(); ++h) {
    auto& s = strata[h];
    s.rough_prevalence = s.population > 0.0 ? std::clamp(rough_mass[h] / s.population, 0.0, 1.0) : 0.0;
  }
  return strata;
}

std::vector<std::int64_t> apportion(const std::vector<double>& weights, std::int64_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::int64_t> out(weights.size(), 0);
  if (!(sum > 0.0) || total <= 0) return out;
  std::vector<double> remainder(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t h = 0; h < weights.size(); ++h) {
    const double target = static_cast<double>(total) * weights[h] / sum;
    out[h] = static_cast<std::int64_t>(std::floor(target));
    remainder[h] = target - static_cast<double>(out[h]);
    assigned += out[h];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    if (weights[order[k]] <= 0.0) continue;
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

StratumAllocation neyman_allocate(const std::vector<StratumSpec>& strata, std::int64_t n) {
  if (strata.empty()) throw ConfigError("Neyman allocation needs at least one stratum");
  StratumAllocation alloc;
  std::vector<double> weights(strata.size(), 0.0);
  std::int64_t reserved = 0;
  bool any_spread = false;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const double p = strata[h].rough_prevalence;
    const double spread = std::sqrt(p * (1.0 - p));
    weights[h] = strata[h].population * spread;
    if (weights[h] > 0.0) any_spread = true;
  }
  if (!any_spread) {
    alloc.warnings.emplace_back("Neyman allocation: no stratum has spread, using proportional allocation");
    for (std::size_t h = 0; h < strata.size(); ++h) weights[h] = strata[h].population;
    if (!(std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0))
      throw ComputationError("Neyman allocation: every stratum is empty");
    alloc.sizes = apportion(weights, n);
    return alloc;
  }
  for (std::size_t h = 0; h < strata.size(); ++h)
    if (weights[h] <= 0.0 && strata[h].population > 0.0) reserved += 2;
  if (reserved >= n) throw ConfigError("sample size too small for the minimum per-stratum size");
  alloc.sizes = apportion(weights, n - reserved);
  for (std::size_t h = 0; h < strata.size(); ++h)
    if (weights[h] <= 0.0 && strata[h].population > 0.0) alloc.sizes[h] = 2;
  return alloc;
}

SurveyEstimate stratified_estimate(const std::vector<StratumSpec>& strata,
                                   const std::vector<std::int64_t>& sizes,
                                   const std::vector<std::int64_t>& positives, double alpha,
                                   bool fpc) {
  if (sizes.size() != strata.size() || positives.size() != strata.size())
    throw ConfigError("stratified_estimate: inconsistent lengths");
  SurveyEstimate est;
  est.alpha = alpha;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const double big_n = strata[h].population;
    if (!(big_n > 0.0)) continue;
    if (sizes[h] < 1)
      throw ConfigError("stratum \"" + strata[h].id + "\" has sample size 0");
    if (positives[h] < 0 || positives[h] > sizes[h])
      throw ComputationError("stratum \"" + strata[h].id + "\": positives exceed sample size");
    const auto m = static_cast<double>(sizes[h]);
    const double p = static_cast<double>(positives[h]) / m;
    const double fraction = fpc ? std::min(1.0, m / big_n) : 0.0;
    est.t_hat += big_n * p;
    est.v_hat += big_n * big_n * (1.0 - fraction) * p * (1.0 - p) / m;
  }
  est.ci = confidence_interval(est.t_hat, est.v_hat, alpha);
  return est;
}

std::vector<double> stratum_prevalence(const std::vector<StratumSpec>& strata,
                                       const GridDensity& inf) {
  std::vector<double> p(strata.size(), 0.0);
  const double area = inf.region().cell_area();
  for (std::size_t h = 0; h < strata.size(); ++h) {
    double mass = 0.0;
    for (std::size_t c : strata[h].cells) mass += inf[c] * area;
    if (strata[h].population > 0.0) p[h] = std::clamp(mass / strata[h].population, 0.0, 1.0);
  }
  return p;
}

std::vector<std::int64_t> simulate_stratified_tests(const std::vector<std::int64_t>& sizes,
                                                    const std::vector<double>& prevalence, Rng& rng) {
  std::vector<std::int64_t> positives(sizes.size(), 0);
  for (std::size_t h = 0; h < sizes.size(); ++h) {
    const double p = prevalence[h];
    if (sizes[h] <= 0 || p <= 0.0) continue;
    if (p >= 1.0) {
      positives[h] = sizes[h];
      continue;
    }
    std::binomial_distribution<std::int64_t> bin(sizes[h], p);
    positives[h] = bin(rng);
  }
  return positives;
}

}  // namespace prevmap
