// prevmap: validate scenarios, run surveys and simulation studies.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "prevmap/csv.hpp"
#include "prevmap/experiments.hpp"
#include "prevmap/grid_io.hpp"
#include "prevmap/parallel.hpp"
#include "prevmap/scenarios.hpp"
#include "prevmap/stratified.hpp"
#include "prevmap/survey.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace prevmap;

namespace {

constexpr std::uint64_t kDefaultSeed = 20200401;

struct CliConfig {
  std::string command;
  std::string kind;
  std::string scenario;
  std::string districts;
  std::string cellmap;
  double infection_multiplier = 1.0;
  std::string sampler = "gls";
  std::size_t m = 210;
  std::optional<std::size_t> r;
  std::int64_t n = 10000;
  double eta = 0.0;
  double alpha = 0.05;
  std::optional<double> gamma_check;
  std::size_t replications = 200;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "json";
  std::string group = "E1";
  bool subgrid = false;
  std::size_t scenarios = 20;
  std::optional<double> fpc_area;

  // Execution only; never part of the output.
  std::string out;
  std::size_t threads = 1;
};

template <class T>
ordered_json opt_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json config_to_json(const CliConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  if (!c.kind.empty()) j["kind"] = c.kind;
  j["scenario"] = c.scenario;
  j["districts"] = c.districts;
  j["cellmap"] = c.cellmap;
  j["infection_multiplier"] = c.infection_multiplier;
  j["sampler"] = c.sampler;
  j["m"] = c.m;
  j["r"] = opt_json(c.r);
  j["n"] = c.n;
  j["eta"] = c.eta;
  j["alpha"] = c.alpha;
  j["gamma_check"] = opt_json(c.gamma_check);
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["format"] = c.format;
  j["group"] = c.group;
  j["subgrid"] = c.subgrid;
  j["scenarios"] = c.scenarios;
  j["fpc_area"] = opt_json(c.fpc_area);
  return j;
}

CliConfig config_from_json(const nlohmann::json& j) {
  try {
    CliConfig c;
    c.command = j.at("command").get<std::string>();
    c.kind = j.value("kind", std::string{});
    c.scenario = j.at("scenario").get<std::string>();
    c.districts = j.at("districts").get<std::string>();
    c.cellmap = j.at("cellmap").get<std::string>();
    c.infection_multiplier = j.at("infection_multiplier").get<double>();
    c.sampler = j.at("sampler").get<std::string>();
    c.m = j.at("m").get<std::size_t>();
    if (!j.at("r").is_null()) c.r = j.at("r").get<std::size_t>();
    c.n = j.at("n").get<std::int64_t>();
    c.eta = j.at("eta").get<double>();
    c.alpha = j.at("alpha").get<double>();
    if (!j.at("gamma_check").is_null()) c.gamma_check = j.at("gamma_check").get<double>();
    c.replications = j.at("replications").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.format = j.at("format").get<std::string>();
    c.group = j.at("group").get<std::string>();
    c.subgrid = j.at("subgrid").get<bool>();
    c.scenarios = j.at("scenarios").get<std::size_t>();
    if (!j.at("fpc_area").is_null()) c.fpc_area = j.at("fpc_area").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("embedded config is incomplete: ") + e.what());
  }
}

/// Reads the config embedded in an earlier JSON or CSV output.
CliConfig config_from_output(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  const std::string tag = "# config: ";
  if (first.rfind(tag, 0) == 0) {
    try {
      return config_from_json(nlohmann::json::parse(first.substr(tag.size())));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ": malformed config line: " + e.what());
    }
  }
  const nlohmann::json doc = read_json_file(path);
  if (!doc.contains("config")) throw DataError(path + " has no embedded config");
  return config_from_json(doc["config"]);
}

// ---------------------------------------------------------------------------

struct Inputs {
  StratifiedScenario st;
  bool has_strata = false;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

/// Loads the scenario and settles gamma_check (flag, else the file's value,
/// else 0.05 for district data).
Inputs load_inputs(CliConfig& c) {
  Inputs in;
  const bool have_scenario = !c.scenario.empty();
  const bool have_districts = !c.districts.empty() || !c.cellmap.empty();
  if (have_scenario && have_districts)
    throw ConfigError("use either --scenario or --districts/--cellmap, not both");
  if (have_scenario) {
    in.st.scenario = scenario_from_json(read_json_file(c.scenario));
    if (c.gamma_check) in.st.scenario.gamma_check = *c.gamma_check;
    c.gamma_check = in.st.scenario.gamma_check;
  } else if (have_districts) {
    if (c.districts.empty() || c.cellmap.empty())
      throw ConfigError("--districts and --cellmap must be given together");
    auto dstream = open_input(c.districts);
    auto mstream = open_input(c.cellmap);
    const DistrictTable table = read_district_csv(dstream, c.infection_multiplier);
    const CellMap map = read_cellmap_csv(mstream);
    if (!c.gamma_check) c.gamma_check = 0.05;
    in.st = district_scenario(table, map, *c.gamma_check);
    in.has_strata = true;
  } else {
    throw ConfigError("an input is required: --scenario FILE, or --districts FILE --cellmap FILE");
  }
  in.st.scenario.validate();
  return in;
}

ReplicationConfig replication_config(const CliConfig& c, const Inputs& in) {
  ReplicationConfig rc;
  rc.scenario = in.st.scenario;
  rc.method = method_from_string(c.sampler);
  rc.m_design = c.m;
  rc.r_positions = *c.r;
  rc.n_total = c.n;
  rc.eta = c.eta;
  rc.alpha = c.alpha;
  rc.replications = c.replications;
  rc.master_seed = c.seed;
  rc.threads = c.threads;
  if (c.fpc_area) {
    rc.fpc = true;
    rc.neighborhood_area = *c.fpc_area;
  }
  if (rc.method == Method::stratified) {
    if (!in.has_strata) throw ConfigError("--sampler stratified needs --districts and --cellmap");
    rc.stratum_ids = in.st.stratum_ids;
    rc.cell_labels = in.st.cell_labels;
  }
  return rc;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

struct Output {
  ordered_json json;
  std::string csv_body;
  std::string summary;
};

// ---------------------------------------------------------------------------

Output run_validate(CliConfig& c) {
  Inputs in = load_inputs(c);
  const Scenario& s = in.st.scenario;
  const GridDensity rough = rough_infection_density(s.pop, s.diag, s.gamma_check);
  const NormalizedDensity phi = sampling_density(rough);
  Output o;
  o.json["grid"] = {{"nx", s.pop.region().nx()}, {"ny", s.pop.region().ny()}};
  o.json["population_total"] = integrate(s.pop);
  o.json["diagnosed_total"] = integrate(s.diag);
  o.json["infection_total"] = integrate(s.inf);
  o.json["rough_total"] = phi.normalizer;
  if (in.has_strata) o.json["strata"] = in.st.stratum_ids.size();
  std::ostringstream sum;
  sum << "valid scenario: " << s.pop.region().nx() << "x" << s.pop.region().ny() << " grid";
  if (in.has_strata) sum << ", " << in.st.stratum_ids.size() << " strata";
  sum << "\n  N_P = " << fmt(integrate(s.pop)) << "  N_D = " << fmt(integrate(s.diag))
      << "  N_I = " << fmt(integrate(s.inf)) << "\n  gamma_check = " << fmt(s.gamma_check)
      << "  rough total = " << fmt(phi.normalizer) << "\n";
  o.summary = sum.str();
  return o;
}

Output run_survey(CliConfig& c) {
  Inputs in = load_inputs(c);
  if (!c.r) c.r = 50;
  const ReplicationConfig rc = replication_config(c, in);
  Rng rng = stream_rng(c.seed, {0});
  Output o;
  std::ostringstream csv, sum;
  SurveyEstimate est;
  const double truth = integrate(in.st.scenario.inf);

  if (rc.method == Method::stratified) {
    const PreparedScenario prepared(in.st.scenario);
    const auto strata = build_strata(rc.stratum_ids, rc.cell_labels, in.st.scenario.pop, prepared.rough);
    const StratumAllocation alloc = neyman_allocate(strata, c.n);
    const auto positives =
        simulate_stratified_tests(alloc.sizes, stratum_prevalence(strata, in.st.scenario.inf), rng);
    est = stratified_estimate(strata, alloc.sizes, positives, c.alpha, rc.fpc);
    ordered_json res;
    res["t_hat"] = est.t_hat;
    res["v_hat"] = est.v_hat;
    res["ci"] = {est.ci.low, est.ci.high};
    res["alpha"] = est.alpha;
    auto rows = ordered_json::array();
    csv << "stratum_id,population,size,positives\n";
    for (std::size_t h = 0; h < strata.size(); ++h) {
      rows.push_back({strata[h].id, strata[h].population, alloc.sizes[h], positives[h]});
      csv << strata[h].id << ',' << format_real(strata[h].population) << ',' << alloc.sizes[h] << ','
          << positives[h] << '\n';
    }
    res["strata"] = std::move(rows);
    o.json["true_total"] = truth;
    o.json["warnings"] = alloc.warnings;
    o.json["result"] = std::move(res);
  } else {
    SurveySettings st;
    st.sampler = rc.method == Method::sir ? SamplerId::sir : rc.method == Method::mh ? SamplerId::mh : SamplerId::gls;
    st.r = rc.r_positions;
    st.n = rc.n_total;
    st.eta = rc.eta;
    st.alpha = rc.alpha;
    st.fpc = rc.fpc;
    st.neighborhood_area = rc.neighborhood_area;
    const PreparedScenario prepared(in.st.scenario);
    const SurveyResult res = conduct_survey(prepared, shared_design(c.m), st, rng);
    est = res.estimate;
    csv << "x,y,phi,size,positives\n";
    for (std::size_t i = 0; i < res.plan.sizes.size(); ++i) {
      const Point p = res.plan.draw.positions[i];
      csv << format_real(p.x) << ',' << format_real(p.y) << ',' << format_real(res.plan.draw.phi_values[i])
          << ',' << res.plan.sizes[i] << ',' << res.outcome.positives[i] << '\n';
    }
    o.json["true_total"] = truth;
    o.json["warnings"] = res.plan.warnings;
    o.json["result"] = survey_result_to_json(res);
  }
  sum << "survey (" << c.sampler << ", n = " << c.n;
  if (rc.method != Method::stratified) sum << ", r = " << *c.r << ", m = " << c.m;
  sum << ", gamma_check = " << fmt(*c.gamma_check) << ", seed = " << c.seed << ")\n"
      << "  T_hat = " << fmt(est.t_hat, 8) << "  sd = " << fmt(std::sqrt(est.v_hat)) << "\n"
      << "  " << fmt(100.0 * (1.0 - c.alpha), 4) << "% CI = [" << fmt(est.ci.low, 8) << ", "
      << fmt(est.ci.high, 8) << "]\n"
      << "  simulated truth N_I = " << fmt(truth, 8) << "\n";
  o.csv_body = csv.str();
  o.summary = sum.str();
  return o;
}

std::string report_summary(const std::string& title, const ExperimentReport& r) {
  std::ostringstream s;
  s << title << "\n  true N_I = " << fmt(r.true_total, 8) << "  mean T_hat = " << fmt(r.mean_t_hat, 8)
    << "  relative bias = " << fmt(r.relative_bias, 3) << "\n  sd(T_hat) = " << fmt(r.empirical_sd)
    << "  mean v_hat = " << fmt(r.mean_v_hat) << "  CI coverage = " << fmt(r.ci_coverage, 4)
    << "\n";
  return s.str();
}

Output run_replicate(CliConfig& c) {
  Inputs in = load_inputs(c);
  if (!c.r) c.r = 50;
  const ExperimentReport rep = run_replications(replication_config(c, in));
  Output o;
  o.json["report"] = report_to_json(rep, true);
  std::ostringstream csv;
  csv << "replication,t_hat,v_hat,covered\n";
  for (std::size_t k = 0; k < rep.t_hats.size(); ++k)
    csv << k << ',' << format_real(rep.t_hats[k]) << ',' << format_real(rep.v_hats[k]) << ','
        << (rep.covered[k] ? 1 : 0) << '\n';
  o.csv_body = csv.str();
  o.summary = report_summary("replications: " + std::to_string(c.replications) + " x " + c.sampler +
                                 " (seed " + std::to_string(c.seed) + ")",
                             rep);
  return o;
}

Output run_ssd(CliConfig& c) {
  if (!c.r) c.r = 50;
  c.gamma_check.reset();
  SsdStudyOptions opt;
  opt.replications = c.replications;
  opt.subgrid = c.subgrid;
  opt.m_design = c.m;
  opt.r_positions = *c.r;
  opt.n_total = c.n;
  opt.alpha = c.alpha;
  opt.threads = c.threads;
  const SsdSurface s = ssd_study(ssd_group_from_string(c.group), c.seed, opt);
  Output o;
  o.json["surface"] = ssd_to_json(s);
  std::ostringstream csv, sum;
  write_ssd_csv(csv, s);
  o.csv_body = csv.str();
  sum << "SSD study " << c.group << ": " << s.truth_ids.size() << " truths x " << s.gamma_checks.size()
      << " gamma_check values, " << c.replications << " replications per cell\n  max SSD by gamma_check:";
  for (std::size_t k = 0; k < s.gamma_checks.size(); ++k)
    sum << (k % 5 == 0 ? "\n    " : "  ") << fmt(s.gamma_checks[k], 3) << ": " << fmt(s.max_ssd[k], 4);
  sum << "\n  minimax gamma_check = " << fmt(s.minimax_gamma_check(), 3)
      << " (max SSD " << fmt(s.max_ssd[s.minimax_index], 4) << ")\n";
  o.summary = sum.str();
  return o;
}

Output run_compare(CliConfig& c) {
  if (!c.r) c.r = 16;
  if (!c.gamma_check) c.gamma_check = 0.0;
  ComparisonOptions opt;
  opt.n_scenarios = c.scenarios;
  opt.replications = c.replications;
  opt.m_design = c.m;
  opt.r_positions = *c.r;
  opt.n_total = c.n;
  opt.gamma_check = *c.gamma_check;
  opt.alpha = c.alpha;
  opt.threads = c.threads;
  const ComparisonResult r = comparison_study(c.seed, opt);
  Output o;
  o.json["comparison"] = comparison_to_json(r);
  std::ostringstream csv, sum;
  write_comparison_csv(csv, r);
  o.csv_body = csv.str();
  sum << "method comparison: " << c.scenarios << " scenarios x " << c.replications << " replications\n";
  sum << "  method       mean rel.bias   mean SSD   mean coverage\n";
  for (const auto& m : r.methods) {
    std::string name = to_string(m.method);
    name.resize(12, ' ');
    sum << "  " << name << " " << fmt(m.mean_relative_bias, 3) << "   " << fmt(m.mean_ssd, 4) << "   "
        << fmt(m.mean_coverage, 4) << "\n";
  }
  o.summary = sum.str();
  return o;
}

Output run_district(CliConfig& c) {
  if (c.districts.empty() && c.cellmap.empty())
    throw ConfigError("experiment district needs --districts and --cellmap");
  Inputs in = load_inputs(c);
  if (!c.r) c.r = 250;
  const Method method = method_from_string(c.sampler);
  if (method == Method::stratified)
    throw ConfigError("experiment district always includes the stratified baseline; choose gls, sir or mh");
  DistrictOptions opt;
  opt.m_design = c.m;
  opt.r_positions = *c.r;
  opt.n_total = c.n;
  opt.gamma_check = *c.gamma_check;
  opt.eta = c.eta;
  opt.alpha = c.alpha;
  opt.replications = c.replications;
  opt.sampler = sampler_from_string(c.sampler);
  opt.threads = c.threads;
  const DistrictComparison d = district_example(in.st, c.seed, opt);
  Output o;
  o.json["comparison"] = district_to_json(d);
  std::ostringstream csv;
  write_district_csv_report(csv, d);
  o.csv_body = csv.str();
  o.summary = report_summary("district example, ours (" + c.sampler + ", r = " + std::to_string(*c.r) + ")",
                             d.ours) +
              report_summary("district example, stratified (Neyman)", d.stratified);
  return o;
}

Output run_fixture(CliConfig& c) {
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  const SyntheticDistricts sd = synthetic_districts(c.seed);
  auto open_out = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open_out(dir / "districts.csv");
    write_district_csv(f, sd.table);
  }
  {
    auto f = open_out(dir / "cellmap.csv");
    write_cellmap_csv(f, sd.map);
  }
  {
    auto f = open_out(dir / "series_e.json");
    f << scenario_to_json(series_e_scenario(0.5, 0.5)).dump(1) << '\n';
  }
  Output o;
  o.summary = "wrote districts.csv (" + std::to_string(sd.table.ids.size()) +
              " districts), cellmap.csv and series_e.json to " + dir.string() + "\n";
  return o;
}

Output dispatch(CliConfig& c) {
  if (c.command == "validate") return run_validate(c);
  if (c.command == "survey") return run_survey(c);
  if (c.command == "fixture") return run_fixture(c);
  if (c.command == "experiment") {
    if (c.kind == "replicate") return run_replicate(c);
    if (c.kind == "ssd") return run_ssd(c);
    if (c.kind == "compare") return run_compare(c);
    if (c.kind == "district") return run_district(c);
    throw ConfigError("unknown experiment kind \"" + c.kind + "\"");
  }
  throw ConfigError("unknown command \"" + c.command + "\"");
}

void check_common(const CliConfig& c) {
  if (c.format != "json" && c.format != "csv") throw ConfigError("--format must be json or csv");
  if (c.n < 1) throw ConfigError("--n must be positive");
  if (c.m < 2) throw ConfigError("--m must be at least 2");
  if (c.r && *c.r < 2) throw ConfigError("--r must be at least 2");
  if (c.replications < 2) throw ConfigError("--replications must be at least 2");
  if (c.scenarios < 1) throw ConfigError("--scenarios must be positive");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  if (!(c.eta >= 0.0 && c.eta <= 1.0)) throw ConfigError("--eta must lie in [0, 1]");
  if (c.gamma_check && !(*c.gamma_check >= 0.0 && *c.gamma_check <= 1.0))
    throw ConfigError("--gamma-check must lie in [0, 1]");
  if (c.fpc_area && !(*c.fpc_area > 0.0)) throw ConfigError("--fpc-area must be positive");
  if (c.threads < 1) throw ConfigError("--threads must be positive");
  method_from_string(c.sampler);
}

int run(CliConfig& c) {
  check_common(c);
  const bool writes_results = c.command != "fixture";
  Output o = dispatch(c);
  if (!writes_results || (c.command == "validate" && c.out.empty())) {
    std::cout << o.summary;
    return 0;
  }
  const ordered_json config = config_to_json(c);
  std::string text;
  if (c.format == "csv" && !o.csv_body.empty()) {
    text = "# config: " + config.dump() + "\n";
    if (o.json.contains("result")) {
      ordered_json est = o.json["result"];
      est.erase("positions");
      est.erase("strata");
      text += "# estimate: " + est.dump() + "\n";
    }
    text += o.csv_body;
  } else {
    ordered_json doc;
    doc["config"] = config;
    for (auto& [k, v] : o.json.items()) doc[k] = v;
    text = doc.dump(2) + "\n";
  }
  if (c.out.empty()) {
    std::cout << text;
    std::cerr << o.summary;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw DataError("cannot write " + c.out);
    f << text;
    if (!f) throw DataError("failed writing " + c.out);
    std::cout << o.summary << "  output: " << c.out << "\n";
  }
  return 0;
}

int report_error(const char* kind, int code, const std::string& message) {
  ordered_json e;
  e["error"] = {{"kind", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << e.dump() << std::endl;
  return code;
}

void add_io_options(CLI::App* s, CliConfig& c) {
  s->add_option("--scenario", c.scenario, "Scenario JSON (pop, diag, inf grids)");
  s->add_option("--districts", c.districts, "District CSV: id,population,cases[,infection_multiplier]");
  s->add_option("--cellmap", c.cellmap, "Cell map CSV: cell_ix,cell_iy,stratum_id");
  s->add_option("--infection-multiplier", c.infection_multiplier,
                "Infections per case for districts without a multiplier column");
}

void add_run_options(CLI::App* s, CliConfig& c) {
  s->add_option("--sampler", c.sampler, "Position sampler or baseline")
      ->check(CLI::IsMember({"gls", "sir", "mh", "stratified"}));
  s->add_option("--m", c.m, "Design size M");
  s->add_option("--r", c.r, "Sampling positions r");
  s->add_option("--n", c.n, "Total sample size n");
  s->add_option("--eta", c.eta, "Equal-split mixing weight for sample sizes");
  s->add_option("--alpha", c.alpha, "CI level is 1 - alpha");
  s->add_option("--gamma-check", c.gamma_check, "Rough-estimate weight on population");
  s->add_option("--fpc-area", c.fpc_area, "Enable the finite population correction with this neighborhood area");
}

void add_output_options(CLI::App* s, CliConfig& c) {
  s->add_option("--seed", c.seed, "Master seed (env PREVMAP_SEED when absent)");
  s->add_option("--out", c.out, "Output file (default: stdout)");
  s->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  s->add_option("--threads", c.threads, "Worker threads; results do not depend on it");
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig c;
  c.threads = default_thread_count();
  std::string replay_path;

  CLI::App app{"prevmap: two-stage spatial sampling for infection totals"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check a scenario or district data set");
  add_io_options(validate, c);
  validate->add_option("--gamma-check", c.gamma_check, "Rough-estimate weight on population");
  validate->add_option("--out", c.out, "Write a JSON summary here");

  auto* survey = app.add_subcommand("survey", "Run one survey against the simulated truth");
  add_io_options(survey, c);
  add_run_options(survey, c);
  add_output_options(survey, c);

  auto* experiment = app.add_subcommand("experiment", "Replicated simulation studies");
  experiment->require_subcommand(1);
  auto* replicate = experiment->add_subcommand("replicate", "Repeat one survey design");
  add_io_options(replicate, c);
  add_run_options(replicate, c);
  replicate->add_option("--replications", c.replications, "Independent replications");
  add_output_options(replicate, c);

  auto* ssd = experiment->add_subcommand("ssd", "Robust gamma_check study on the 2x2 scenarios");
  ssd->add_option("--group", c.group, "Scenario group")->check(CLI::IsMember({"E1", "E2", "E3", "R1", "R2", "R3"}));
  ssd->add_flag("--subgrid", c.subgrid, "Every third grid value only");
  ssd->add_option("--m", c.m, "Design size M");
  ssd->add_option("--r", c.r, "Sampling positions r");
  ssd->add_option("--n", c.n, "Total sample size n");
  ssd->add_option("--alpha", c.alpha, "CI level is 1 - alpha");
  ssd->add_option("--replications", c.replications, "Replications per cell");
  add_output_options(ssd, c);

  auto* compare = experiment->add_subcommand("compare", "GLS, SIR, MH and stratified on random scenarios");
  compare->add_option("--scenarios", c.scenarios, "Number of random scenarios");
  compare->add_option("--m", c.m, "Design size M");
  compare->add_option("--r", c.r, "Sampling positions r");
  compare->add_option("--n", c.n, "Total sample size n");
  compare->add_option("--alpha", c.alpha, "CI level is 1 - alpha");
  compare->add_option("--gamma-check", c.gamma_check, "Rough-estimate weight on population");
  compare->add_option("--replications", c.replications, "Replications per method and scenario");
  add_output_options(compare, c);

  auto* district = experiment->add_subcommand("district", "Our method against stratified sampling on districts");
  add_io_options(district, c);
  add_run_options(district, c);
  district->add_option("--replications", c.replications, "Independent replications");
  add_output_options(district, c);

  auto* fixture = app.add_subcommand("fixture", "Write the synthetic district data and a Series-E scenario");
  fixture->add_option("--out", c.out, "Directory (default: current)");
  fixture->add_option("--seed", c.seed, "Generator seed");

  auto* replay = app.add_subcommand("replay", "Re-run the configuration embedded in an earlier output");
  replay->add_option("file", replay_path, "Earlier JSON or CSV output")->required();
  replay->add_option("--out", c.out, "Output file (default: stdout)");
  replay->add_option("--threads", c.threads, "Worker threads; results do not depend on it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", 2, e.what());
  }

  try {
    if (*replay) {
      CliConfig r = config_from_output(replay_path);
      r.out = c.out;
      r.threads = c.threads;
      c = std::move(r);
    } else {
      for (CLI::App* sub : app.get_subcommands()) {
        c.command = sub->get_name();
        for (CLI::App* inner : sub->get_subcommands()) c.kind = inner->get_name();
        const CLI::App* leaf = c.kind.empty() ? sub : sub->get_subcommands().front();
        const auto* seed_opt = leaf->get_option_no_throw("--seed");
        if (seed_opt && seed_opt->count() == 0) {
          if (const char* env = std::getenv("PREVMAP_SEED")) {
            try {
              std::size_t used = 0;
              c.seed = std::stoull(env, &used, 0);
              if (used != std::string(env).size()) throw std::invalid_argument("trailing");
            } catch (const std::logic_error&) {
              throw ConfigError(std::string("PREVMAP_SEED is not an unsigned integer: ") + env);
            }
          }
        }
      }
    }
    return run(c);
  } catch (const ConfigError& e) {
    return report_error("config", 2, e.what());
  } catch (const DataError& e) {
    return report_error("data", 3, e.what());
  } catch (const ComputationError& e) {
    return report_error("computation", 4, e.what());
  } catch (const std::exception& e) {
    return report_error("internal", 1, e.what());
  }
}
