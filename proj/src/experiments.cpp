#include "prevmap/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>

#include "prevmap/csv.hpp"
#include "prevmap/parallel.hpp"

namespace prevmap {

namespace {

[[noreturn]] void rethrow_annotated(const IndexedFailure& failure, const std::string& where) {
  const std::string prefix = where + " " + std::to_string(failure.index) + ": ";
  try {
    std::rethrow_exception(failure.error);
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const ComputationError& e) {
    throw ComputationError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

void validate(const ReplicationConfig& c) {
  if (c.replications < 2) throw ConfigError("replications must be >= 2");
  if (c.r_positions < 2 && c.method != Method::stratified)
    throw ConfigError("r must be >= 2 for variance estimation");
  if (c.n_total < 1) throw ConfigError("n must be positive");
  if (c.m_design < 2) throw ConfigError("m must be >= 2");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(c.eta >= 0.0 && c.eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (c.method == Method::stratified && c.cell_labels.empty())
    throw ConfigError("stratified sampling needs a stratum map");
}

double relative(double estimate, double truth) {
  if (truth != 0.0) return (estimate - truth) / truth;
  return estimate == 0.0 ? 0.0 : std::copysign(INFINITY, estimate);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::uint64_t group_tag(SsdGroup g) { return static_cast<std::uint64_t>(g); }

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::gls: return "gls";
    case Method::sir: return "sir";
    case Method::mh: return "mh";
    case Method::stratified: return "stratified";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "stratified") return Method::stratified;
  switch (sampler_from_string(name)) {
    case SamplerId::gls: return Method::gls;
    case SamplerId::sir: return Method::sir;
    case SamplerId::mh: return Method::mh;
  }
  return Method::gls;
}

double ExperimentReport::monte_carlo_se() const {
  return t_hats.empty() ? 0.0 : empirical_sd / std::sqrt(static_cast<double>(t_hats.size()));
}

const DesignPointSet& shared_design(std::size_t m) {
  static std::mutex mutex;
  static std::map<std::size_t, DesignPointSet> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, generate_design(m)).first;
  return it->second;
}

nlohmann::ordered_json settings_json(const ReplicationConfig& c) {
  nlohmann::ordered_json j;
  j["method"] = to_string(c.method);
  j["design_mode"] = c.mode == DesignMode::oracle ? "oracle" : "nearly_optimal";
  j["gamma_check"] = c.scenario.gamma_check;
  j["m"] = c.m_design;
  j["r"] = c.r_positions;
  j["n"] = c.n_total;
  j["eta"] = c.eta;
  j["alpha"] = c.alpha;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  if (c.method == Method::mh)
    j["mh"] = {{"proposal_sd", c.mh.proposal_sd}, {"burn_in", c.mh.burn_in}, {"thinning", c.mh.thinning}};
  if (c.method == Method::sir) j["sir_pool"] = c.sir_pool ? c.sir_pool : kSirPoolFactor * c.r_positions;
  if (c.method == Method::stratified)
    j["stratified_estimator"] = "textbook single-stage stratified SRS, Neyman allocation";
  j["fpc"] = c.fpc;
  if (c.fpc) j["neighborhood_area"] = c.neighborhood_area;
  return j;
}

ExperimentReport run_replications(const ReplicationConfig& config) {
  validate(config);
  const PreparedScenario prepared(config.scenario);
  const std::size_t reps = config.replications;

  ExperimentReport report;
  report.settings = settings_json(config);
  report.true_total = prepared.true_total;
  report.t_hats.assign(reps, 0.0);
  report.v_hats.assign(reps, 0.0);
  report.covered.assign(reps, false);
  std::vector<unsigned char> covered(reps, 0);
  std::vector<std::size_t> warnings(reps, 0);

  try {
    if (config.method == Method::stratified) {
      const auto strata = build_strata(config.stratum_ids, config.cell_labels, prepared.scenario.pop,
                                       prepared.rough);
      const StratumAllocation alloc = neyman_allocate(strata, config.n_total);
      const std::vector<double> prevalence = stratum_prevalence(strata, prepared.scenario.inf);
      parallel_for_index(reps, config.threads, [&](std::size_t k) {
        Rng rng = stream_rng(config.master_seed, {k});
        const auto positives = simulate_stratified_tests(alloc.sizes, prevalence, rng);
        const SurveyEstimate est =
            stratified_estimate(strata, alloc.sizes, positives, config.alpha, config.fpc);
        report.t_hats[k] = est.t_hat;
        report.v_hats[k] = est.v_hat;
        covered[k] = est.ci.contains(prepared.true_total);
        warnings[k] = alloc.warnings.size();
      });
    } else {
      const DesignPointSet& design = shared_design(config.m_design);
      SurveySettings settings;
      settings.sampler = config.method == Method::sir  ? SamplerId::sir
                         : config.method == Method::mh ? SamplerId::mh
                                                       : SamplerId::gls;
      settings.r = config.r_positions;
      settings.n = config.n_total;
      settings.eta = config.eta;
      settings.alpha = config.alpha;
      settings.mode = config.mode;
      settings.mh = config.mh;
      settings.sir_pool = config.sir_pool;
      settings.fpc = config.fpc;
      settings.neighborhood_area = config.neighborhood_area;
      parallel_for_index(reps, config.threads, [&](std::size_t k) {
        Rng rng = stream_rng(config.master_seed, {k});
        const SurveyResult res = conduct_survey(prepared, design, settings, rng);
        report.t_hats[k] = res.estimate.t_hat;
        report.v_hats[k] = res.estimate.v_hat;
        covered[k] = res.estimate.ci.contains(prepared.true_total);
        warnings[k] = res.plan.warnings.size();
      });
    }
  } catch (const IndexedFailure& f) {
    rethrow_annotated(f, "replication");
  }

  const double rd = static_cast<double>(reps);
  report.mean_t_hat = mean_of(report.t_hats);
  double ss = 0.0;
  for (double t : report.t_hats) ss += (t - report.mean_t_hat) * (t - report.mean_t_hat);
  report.empirical_sd = std::sqrt(ss / (rd - 1.0));
  report.mean_v_hat = mean_of(report.v_hats);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < reps; ++k) {
    report.covered[k] = covered[k] != 0;
    hits += covered[k];
    report.warnings += warnings[k];
  }
  report.ci_coverage = static_cast<double>(hits) / rd;
  report.relative_bias = relative(report.mean_t_hat, report.true_total);
  return report;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& r, bool include_replications) {
  nlohmann::ordered_json j;
  j["settings"] = r.settings;
  j["true_total"] = r.true_total;
  j["mean_t_hat"] = r.mean_t_hat;
  j["relative_bias"] = r.relative_bias;
  j["empirical_sd"] = r.empirical_sd;
  j["monte_carlo_se"] = r.monte_carlo_se();
  j["mean_v_hat"] = r.mean_v_hat;
  j["ci_coverage"] = r.ci_coverage;
  if (r.ssd) j["ssd"] = *r.ssd;
  j["warnings"] = r.warnings;
  if (include_replications) {
    j["t_hats"] = r.t_hats;
    j["v_hats"] = r.v_hats;
    j["covered"] = r.covered;
  }
  return j;
}

// ---------------------------------------------------------------------------

std::string to_string(SsdGroup g) {
  static const char* names[] = {"E1", "E2", "E3", "R1", "R2", "R3"};
  return names[static_cast<int>(g)];
}

SsdGroup ssd_group_from_string(const std::string& name) {
  for (int g = 0; g < 6; ++g)
    if (to_string(static_cast<SsdGroup>(g)) == name) return static_cast<SsdGroup>(g);
  throw ConfigError("unknown SSD group \"" + name + "\" (expected E1..E3, R1..R3)");
}

std::vector<double> group_gamma_grid(SsdGroup g, bool subgrid) {
  // Multiples of 0.05 as k / 20 to avoid accumulated round-off.
  int lo = 1, hi = 19;
  if (g == SsdGroup::E2 || g == SsdGroup::R2) hi = 10;
  if (g == SsdGroup::E3 || g == SsdGroup::R3) lo = 10;
  std::vector<double> grid;
  for (int k = lo; k <= hi; k += subgrid ? 3 : 1) grid.push_back(static_cast<double>(k) / 20.0);
  return grid;
}

SsdSurface ssd_study(SsdGroup group, std::uint64_t seed, const SsdStudyOptions& options) {
  SsdSurface s;
  s.group = group;
  s.gamma_checks = group_gamma_grid(group, options.subgrid);
  const bool series_e = group == SsdGroup::E1 || group == SsdGroup::E2 || group == SsdGroup::E3;

  std::vector<Scenario> truths;
  if (series_e) {
    for (double g : group_gamma_grid(group, options.subgrid)) {
      truths.push_back(series_e_scenario(g, 0.5));
      s.truth_gammas.push_back({g});
      s.truth_ids.push_back("gamma=" + format_real(g));
    }
  } else {
    double lo = 0.02, hi = 0.98;
    if (group == SsdGroup::R2) hi = 0.53;
    if (group == SsdGroup::R3) lo = 0.47;
    Rng rng = stream_rng(seed, {group_tag(group), 0x52});
    for (std::size_t t = 0; t < 20; ++t) {
      std::array<double, 4> gammas{};
      for (double& g : gammas) g = lo + (hi - lo) * uniform01(rng);
      truths.push_back(series_r_scenario(gammas, 0.5));
      s.truth_gammas.emplace_back(gammas.begin(), gammas.end());
      s.truth_ids.push_back("setting" + std::to_string(t + 1));
    }
  }

  ReplicationConfig base;
  base.m_design = options.m_design;
  base.r_positions = options.r_positions;
  base.n_total = options.n_total;
  base.alpha = options.alpha;
  base.replications = options.replications;
  base.threads = options.threads;

  s.ssd.assign(truths.size(), std::vector<double>(s.gamma_checks.size(), 0.0));
  s.oracle_sd.resize(truths.size());
  for (std::size_t t = 0; t < truths.size(); ++t) {
    ReplicationConfig oracle = base;
    oracle.scenario = truths[t];
    oracle.mode = DesignMode::oracle;
    oracle.master_seed = derive_seed(seed, {group_tag(group), t, 0});
    s.oracle_sd[t] = run_replications(oracle).empirical_sd;
    for (std::size_t c = 0; c < s.gamma_checks.size(); ++c) {
      ReplicationConfig working = base;
      working.scenario = truths[t];
      working.scenario.gamma_check = s.gamma_checks[c];
      working.master_seed = derive_seed(seed, {group_tag(group), t, c + 1});
      s.ssd[t][c] = run_replications(working).empirical_sd / s.oracle_sd[t];
    }
  }

  s.max_ssd.assign(s.gamma_checks.size(), 0.0);
  for (std::size_t c = 0; c < s.gamma_checks.size(); ++c)
    for (std::size_t t = 0; t < truths.size(); ++t) s.max_ssd[c] = std::max(s.max_ssd[c], s.ssd[t][c]);
  s.minimax_index = static_cast<std::size_t>(
      std::min_element(s.max_ssd.begin(), s.max_ssd.end()) - s.max_ssd.begin());
  return s;
}

void write_ssd_csv(std::ostream& out, const SsdSurface& s) {
  out << "gamma_check,truth_id,ssd\n";
  for (std::size_t t = 0; t < s.truth_ids.size(); ++t)
    for (std::size_t c = 0; c < s.gamma_checks.size(); ++c)
      out << format_real(s.gamma_checks[c]) << ',' << s.truth_ids[t] << ',' << format_real(s.ssd[t][c])
          << '\n';
  out << format_real(s.minimax_gamma_check()) << ",minimax," << format_real(s.max_ssd[s.minimax_index])
      << '\n';
}

nlohmann::ordered_json ssd_to_json(const SsdSurface& s) {
  nlohmann::ordered_json j;
  j["group"] = to_string(s.group);
  j["gamma_checks"] = s.gamma_checks;
  j["truth_ids"] = s.truth_ids;
  j["truth_gammas"] = s.truth_gammas;
  j["ssd"] = s.ssd;
  j["oracle_sd"] = s.oracle_sd;
  j["max_ssd"] = s.max_ssd;
  j["minimax_gamma_check"] = s.minimax_gamma_check();
  j["minimax_max_ssd"] = s.max_ssd[s.minimax_index];
  return j;
}

// ---------------------------------------------------------------------------

const MethodSummary& ComparisonResult::of(Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw ConfigError("method " + to_string(m) + " not in comparison");
}

ComparisonResult comparison_study(std::uint64_t seed, const ComparisonOptions& options) {
  if (options.n_scenarios < 1) throw ConfigError("comparison study needs at least one scenario");
  static constexpr Method kMethods[] = {Method::gls, Method::sir, Method::mh, Method::stratified};
  ComparisonResult result;
  for (Method m : kMethods) {
    MethodSummary summary;
    summary.method = m;
    result.methods.push_back(std::move(summary));
  }

  for (std::size_t sc = 0; sc < options.n_scenarios; ++sc) {
    Rng scenario_rng = stream_rng(seed, {1, sc});
    StratifiedScenario st = comparison_scenario(options.scenario, options.gamma_check, scenario_rng);

    ReplicationConfig base;
    base.scenario = st.scenario;
    base.m_design = options.m_design;
    base.r_positions = options.r_positions;
    base.n_total = options.n_total;
    base.alpha = options.alpha;
    base.replications = options.replications;
    base.mh = options.mh;
    base.threads = options.threads;

    ReplicationConfig oracle = base;
    oracle.mode = DesignMode::oracle;
    oracle.master_seed = derive_seed(seed, {2, sc, 0});
    const ExperimentReport oracle_report = run_replications(oracle);
    result.oracle_sd.push_back(oracle_report.empirical_sd);
    result.true_totals.push_back(oracle_report.true_total);

    for (std::size_t mi = 0; mi < result.methods.size(); ++mi) {
      ReplicationConfig cfg = base;
      cfg.method = result.methods[mi].method;
      cfg.master_seed = derive_seed(seed, {2, sc, mi + 1});
      if (cfg.method == Method::stratified) {
        cfg.stratum_ids = st.stratum_ids;
        cfg.cell_labels = st.cell_labels;
      }
      const ExperimentReport rep = run_replications(cfg);
      auto& m = result.methods[mi];
      m.relative_bias.push_back(rep.relative_bias);
      m.ssd.push_back(rep.empirical_sd / oracle_report.empirical_sd);
      m.coverage.push_back(rep.ci_coverage);
    }
  }
  for (auto& m : result.methods) {
    m.mean_relative_bias = mean_of(m.relative_bias);
    m.mean_ssd = mean_of(m.ssd);
    m.mean_coverage = mean_of(m.coverage);
  }
  return result;
}

void write_comparison_csv(std::ostream& out, const ComparisonResult& r) {
  out << "method,scenario_id,metric,value\n";
  for (const auto& m : r.methods) {
    for (std::size_t s = 0; s < m.ssd.size(); ++s) {
      const std::string prefix = to_string(m.method) + ',' + std::to_string(s) + ',';
      out << prefix << "relative_bias," << format_real(m.relative_bias[s]) << '\n';
      out << prefix << "ssd," << format_real(m.ssd[s]) << '\n';
      out << prefix << "coverage," << format_real(m.coverage[s]) << '\n';
    }
  }
}

nlohmann::ordered_json comparison_to_json(const ComparisonResult& r) {
  nlohmann::ordered_json j;
  j["true_totals"] = r.true_totals;
  j["oracle_sd"] = r.oracle_sd;
  auto methods = nlohmann::ordered_json::array();
  for (const auto& m : r.methods) {
    nlohmann::ordered_json mj;
    mj["method"] = to_string(m.method);
    mj["mean_relative_bias"] = m.mean_relative_bias;
    mj["mean_ssd"] = m.mean_ssd;
    mj["mean_coverage"] = m.mean_coverage;
    mj["relative_bias"] = m.relative_bias;
    mj["ssd"] = m.ssd;
    mj["coverage"] = m.coverage;
    methods.push_back(std::move(mj));
  }
  j["methods"] = std::move(methods);
  return j;
}

// ---------------------------------------------------------------------------

DistrictComparison district_example(const StratifiedScenario& districts, std::uint64_t seed,
                                    const DistrictOptions& options) {
  ReplicationConfig base;
  base.scenario = districts.scenario;
  base.scenario.gamma_check = options.gamma_check;
  base.m_design = options.m_design;
  base.r_positions = options.r_positions;
  base.n_total = options.n_total;
  base.eta = options.eta;
  base.alpha = options.alpha;
  base.replications = options.replications;
  base.threads = options.threads;

  DistrictComparison out;
  ReplicationConfig ours = base;
  ours.method = options.sampler == SamplerId::sir  ? Method::sir
                : options.sampler == SamplerId::mh ? Method::mh
                                                   : Method::gls;
  ours.master_seed = derive_seed(seed, {3, 0});
  out.ours = run_replications(ours);

  ReplicationConfig strat = base;
  strat.method = Method::stratified;
  strat.stratum_ids = districts.stratum_ids;
  strat.cell_labels = districts.cell_labels;
  strat.master_seed = derive_seed(seed, {3, 1});
  out.stratified = run_replications(strat);
  return out;
}

void write_district_csv_report(std::ostream& out, const DistrictComparison& c) {
  out << "method,mean,sd,coverage,relative_bias\n";
  auto row = [&](const char* name, const ExperimentReport& r) {
    out << name << ',' << format_real(r.mean_t_hat) << ',' << format_real(r.empirical_sd) << ','
        << format_real(r.ci_coverage) << ',' << format_real(r.relative_bias) << '\n';
  };
  row("ours", c.ours);
  row("stratified", c.stratified);
}

nlohmann::ordered_json district_to_json(const DistrictComparison& c) {
  nlohmann::ordered_json j;
  j["ours"] = report_to_json(c.ours, false);
  j["stratified"] = report_to_json(c.stratified, false);
  return j;
}

}  // namespace prevmap
