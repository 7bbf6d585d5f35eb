#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prevmap/density.hpp"
#include "prevmap/random.hpp"
#include "prevmap/survey.hpp"

namespace prevmap {

struct StratumSpec {
  std::string id;
  std::vector<std::size_t> cells;
  /// N_h
  double population = 0.0;
  /// Prevalence guess from the rough infection density aggregated over the
  /// stratum, in [0,1].
  double rough_prevalence = 0.0;
};

/// Builds strata from a per-cell label (index into ids, -1 for none).
/// Masked-out cells must be unlabeled and every inside cell labeled.
std::vector<StratumSpec> build_strata(const std::vector<std::string>& ids,
                                      const std::vector<int>& cell_labels, const GridDensity& pop,
                                      const GridDensity& rough);

struct StratumAllocation {
  std::vector<std::int64_t> sizes;
  std::vector<std::string> warnings;
};

/// Neyman allocation n_h proportional to N_h sqrt(p_h (1 - p_h)), apportioned
/// to integers summing to n by largest remainder (ties to the lower index).
/// Populated strata with zero spread get 2; empty strata get 0. If no
/// stratum has spread, falls back to proportional allocation.
StratumAllocation neyman_allocate(const std::vector<StratumSpec>& strata, std::int64_t n);

/// Largest-remainder rounding of nonnegative weights to integers summing to
/// total. Exposed for testing.
std::vector<std::int64_t> apportion(const std::vector<double>& weights, std::int64_t total);

/// T = sum_h N_h phat_h, v = sum_h N_h^2 (1 - f_h) phat_h (1 - phat_h) / n_h,
/// with f_h = n_h / N_h under FPC and 0 otherwise. Empty strata are skipped.
SurveyEstimate stratified_estimate(const std::vector<StratumSpec>& strata,
                                   const std::vector<std::int64_t>& sizes,
                                   const std::vector<std::int64_t>& positives, double alpha,
                                   bool fpc = false);

/// True aggregate prevalence per stratum (int_h f_I / N_h).
std::vector<double> stratum_prevalence(const std::vector<StratumSpec>& strata,
                                       const GridDensity& inf);

/// positives_h ~ Binomial(n_h, p_h).
std::vector<std::int64_t> simulate_stratified_tests(const std::vector<std::int64_t>& sizes,
                                                    const std::vector<double>& prevalence, Rng& rng);

}  // namespace prevmap
