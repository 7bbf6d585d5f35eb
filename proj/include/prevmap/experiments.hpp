#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prevmap/scenarios.hpp"
#include "prevmap/stratified.hpp"
#include "prevmap/survey.hpp"

namespace prevmap {

enum class Method { gls, sir, mh, stratified };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Settings of one batch of independent replications of one survey design.
struct ReplicationConfig {
  Scenario scenario;
  Method method = Method::gls;
  DesignMode mode = DesignMode::nearly_optimal;
  std::size_t m_design = 210;
  std::size_t r_positions = 50;
  std::int64_t n_total = 10000;
  double eta = 0.0;
  double alpha = 0.05;
  std::size_t replications = 200;
  std::uint64_t master_seed = 0;
  MhOptions mh;
  std::size_t sir_pool = 0;
  bool fpc = false;
  double neighborhood_area = 0.0;
  /// Strata, required for Method::stratified.
  std::vector<std::string> stratum_ids;
  std::vector<int> cell_labels;
  /// Worker count; never affects results.
  std::size_t threads = 1;
};

struct ExperimentReport {
  std::vector<double> t_hats;
  std::vector<double> v_hats;
  std::vector<bool> covered;
  double true_total = 0.0;
  double mean_t_hat = 0.0;
  double relative_bias = 0.0;
  /// Sample standard deviation of t_hat across replications.
  double empirical_sd = 0.0;
  double mean_v_hat = 0.0;
  double ci_coverage = 0.0;
  /// Filled by studies that have an oracle reference.
  std::optional<double> ssd;
  std::size_t warnings = 0;
  nlohmann::ordered_json settings;

  /// empirical_sd / sqrt(replications).
  double monte_carlo_se() const;
  double empirical_variance() const { return empirical_sd * empirical_sd; }
};

/// Runs the full pipeline `replications` times. Replication k draws from the
/// stream (master_seed, k), and aggregation is by index, so the report is
/// identical for any thread count.
ExperimentReport run_replications(const ReplicationConfig& config);

/// Cached generate_design(m); thread-safe.
const DesignPointSet& shared_design(std::size_t m);

nlohmann::ordered_json settings_json(const ReplicationConfig& config);
nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool include_replications);

// ---------------------------------------------------------------------------
// Robust gamma_check study.

enum class SsdGroup { E1, E2, E3, R1, R2, R3 };
std::string to_string(SsdGroup g);
SsdGroup ssd_group_from_string(const std::string& name);

struct SsdStudyOptions {
  std::size_t replications = 200;
  /// Every third grid value (7 of 19, 4 of 10) instead of the full grid.
  bool subgrid = false;
  std::size_t m_design = 210;
  std::size_t r_positions = 50;
  std::int64_t n_total = 10000;
  double alpha = 0.05;
  std::size_t threads = 1;
};

struct SsdSurface {
  SsdGroup group = SsdGroup::E1;
  std::vector<double> gamma_checks;
  std::vector<std::string> truth_ids;
  /// gamma per truth (Series E) or the four gamma_i (Series R).
  std::vector<std::vector<double>> truth_gammas;
  /// ssd[truth][gamma_check]
  std::vector<std::vector<double>> ssd;
  std::vector<double> oracle_sd;
  /// Max over truths, per gamma_check.
  std::vector<double> max_ssd;
  std::size_t minimax_index = 0;
  double minimax_gamma_check() const { return gamma_checks[minimax_index]; }
};

/// Values of gamma / gamma_check used by a group, e.g. {0.05, ..., 0.95}.
std::vector<double> group_gamma_grid(SsdGroup g, bool subgrid);

SsdSurface ssd_study(SsdGroup group, std::uint64_t seed, const SsdStudyOptions& options);

/// gamma_check,truth_id,ssd rows plus a final "minimax" row.
void write_ssd_csv(std::ostream& out, const SsdSurface& s);
nlohmann::ordered_json ssd_to_json(const SsdSurface& s);

// ---------------------------------------------------------------------------
// Sampler comparison study.

struct ComparisonOptions {
  std::size_t n_scenarios = 20;
  std::size_t replications = 200;
  ComparisonScenarioConfig scenario;
  std::size_t m_design = 210;
  std::size_t r_positions = 16;
  std::int64_t n_total = 10000;
  double gamma_check = 0.0;
  double alpha = 0.05;
  MhOptions mh;
  std::size_t threads = 1;
};

struct MethodSummary {
  Method method = Method::gls;
  std::vector<double> relative_bias;
  std::vector<double> ssd;
  std::vector<double> coverage;
  double mean_relative_bias = 0.0;
  double mean_ssd = 0.0;
  double mean_coverage = 0.0;
};

struct ComparisonResult {
  std::vector<MethodSummary> methods;
  std::vector<double> true_totals;
  std::vector<double> oracle_sd;

  const MethodSummary& of(Method m) const;
};

ComparisonResult comparison_study(std::uint64_t seed, const ComparisonOptions& options);

/// method,scenario_id,metric,value rows.
void write_comparison_csv(std::ostream& out, const ComparisonResult& result);
nlohmann::ordered_json comparison_to_json(const ComparisonResult& result);

// ---------------------------------------------------------------------------
// District-level example: our method against stratified sampling.

struct DistrictOptions {
  std::size_t m_design = 210;
  std::size_t r_positions = 250;
  std::int64_t n_total = 10000;
  double gamma_check = 0.05;
  double eta = 0.0;
  double alpha = 0.05;
  std::size_t replications = 200;
  SamplerId sampler = SamplerId::gls;
  std::size_t threads = 1;
};

struct DistrictComparison {
  ExperimentReport ours;
  ExperimentReport stratified;
};

DistrictComparison district_example(const StratifiedScenario& districts, std::uint64_t seed,
                                    const DistrictOptions& options);

/// method,mean,sd,coverage,relative_bias rows.
void write_district_csv_report(std::ostream& out, const DistrictComparison& c);
nlohmann::ordered_json district_to_json(const DistrictComparison& c);

}  // namespace prevmap
