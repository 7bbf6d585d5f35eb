#include "prevmap/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "prevmap/csv.hpp"
#include "prevmap/normal.hpp"

namespace prevmap {

namespace {

GridDensity quadrant_density(const std::array<double, 4>& counts_top_first) {
  // counts given as {top-left, top-right, bottom-left, bottom-right}.
  const Region region = Region::unit(2, 2);
  const double area = region.cell_area();
  std::vector<double> values{counts_top_first[2] / area, counts_top_first[3] / area,
                             counts_top_first[0] / area, counts_top_first[1] / area};
  return GridDensity(region, std::move(values));
}

double parse_number(const std::string& field, const std::string& what, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line) + ": " + what + " \"" + field + "\" is not a number");
  }
}

std::size_t parse_index(const std::string& field, const std::string& what, std::size_t line) {
  const double v = parse_number(field, what, line);
  if (v < 0.0 || v != std::floor(v) || v > 1e9)
    throw DataError("line " + std::to_string(line) + ": " + what + " must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

GridDensity series_population() { return quadrant_density({20e4, 40e4, 60e4, 80e4}); }

GridDensity series_cases() { return quadrant_density({6e4, 8e4, 4e4, 2e4}); }

Scenario series_e_scenario(double gamma, double gamma_check) {
  GridDensity pop = series_population();
  GridDensity diag = series_cases();
  GridDensity inf = combine(gamma, pop, 1.0 - gamma, diag);
  Scenario s{std::move(pop), std::move(diag), std::move(inf), gamma_check};
  s.validate();
  return s;
}

Scenario series_r_scenario(const std::array<double, 4>& gammas, double gamma_check) {
  GridDensity pop = series_population();
  GridDensity diag = series_cases();
  std::vector<double> inf(4);
  for (std::size_t c = 0; c < 4; ++c) inf[c] = gammas[c] * pop[c] + (1.0 - gammas[c]) * diag[c];
  Scenario s{pop, diag, GridDensity(pop.region(), std::move(inf)), gamma_check};
  s.validate();
  return s;
}

StratifiedScenario comparison_scenario(const ComparisonScenarioConfig& cfg, double gamma_check,
                                       Rng& rng) {
  const std::size_t k = cfg.subsquares_per_axis;
  if (k == 0 || cfg.raster % k != 0)
    throw ConfigError("raster must be a positive multiple of the sub-squares per axis");
  const std::size_t per = cfg.raster / k;
  const Region region = Region::unit(cfg.raster, cfg.raster);
  const double area = region.cell_area();
  const double width = 1.0 / static_cast<double>(k);
  const double sd = cfg.sd_fraction * width;

  // Truncated-normal cell masses along one axis of a sub-square (same for
  // every sub-square and both axes by symmetry).
  std::vector<double> axis_mass(per);
  {
    const double half = 0.5 * width;
    const double total = normal_cdf(half / sd) - normal_cdf(-half / sd);
    for (std::size_t i = 0; i < per; ++i) {
      const double lo = -half + width * static_cast<double>(i) / static_cast<double>(per);
      const double hi = -half + width * static_cast<double>(i + 1) / static_cast<double>(per);
      axis_mass[i] = (normal_cdf(hi / sd) - normal_cdf(lo / sd)) / total;
    }
  }

  const std::size_t blocks = k * k;
  std::vector<double> cases(blocks), multiplier(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    cases[b] = cfg.cases_min + (cfg.cases_max - cfg.cases_min) * uniform01(rng);
    multiplier[b] = cfg.multiplier_min + (cfg.multiplier_max - cfg.multiplier_min) * uniform01(rng);
  }

  const std::size_t cells = region.cells();
  std::vector<double> pop(cells, cfg.total_population), diag(cells), inf(cells);
  StratifiedScenario out;
  out.cell_labels.resize(cells);
  for (std::size_t iy = 0; iy < cfg.raster; ++iy) {
    for (std::size_t ix = 0; ix < cfg.raster; ++ix) {
      const std::size_t c = iy * cfg.raster + ix;
      const std::size_t b = (iy / per) * k + ix / per;
      const double mass = axis_mass[ix % per] * axis_mass[iy % per];
      diag[c] = cases[b] * mass / area;
      inf[c] = multiplier[b] * diag[c];
      out.cell_labels[c] = static_cast<int>(b);
    }
  }
  for (std::size_t b = 0; b < blocks; ++b)
    out.stratum_ids.push_back("r" + std::to_string(b / k) + "c" + std::to_string(b % k));
  out.scenario = Scenario{GridDensity(region, std::move(pop)), GridDensity(region, std::move(diag)),
                          GridDensity(region, std::move(inf)), gamma_check};
  out.scenario.validate();
  return out;
}

DistrictTable read_district_csv(std::istream& in, double default_multiplier) {
  const CsvTable csv = read_csv(in, true);
  if (csv.header.size() < 3 || csv.header[0] != "id" || csv.header[1] != "population" ||
      csv.header[2] != "cases")
    throw DataError("district CSV header must start with id,population,cases");
  const bool has_mult = csv.header.size() >= 4 && csv.header[3] == "infection_multiplier";
  DistrictTable t;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    const auto& row = csv.rows[k];
    const std::size_t line = csv.lines[k];
    if (row.size() < 3) throw DataError("line " + std::to_string(line) + ": expected at least 3 fields");
    if (!seen.insert(row[0]).second)
      throw DataError("line " + std::to_string(line) + ": duplicate district id \"" + row[0] + "\"");
    const double pop = parse_number(row[1], "population", line);
    const double cases = parse_number(row[2], "cases", line);
    const double mult = has_mult && row.size() >= 4 && !row[3].empty()
                            ? parse_number(row[3], "infection_multiplier", line)
                            : default_multiplier;
    if (pop < 0.0 || cases < 0.0)
      throw DataError("line " + std::to_string(line) + ": population and cases must be nonnegative");
    if (cases > pop) throw DataError("line " + std::to_string(line) + ": cases exceed population");
    if (mult < 1.0 || cases * mult > pop)
      throw DataError("line " + std::to_string(line) +
                      ": infection multiplier must be >= 1 and keep infections <= population");
    t.ids.push_back(row[0]);
    t.population.push_back(pop);
    t.cases.push_back(cases);
    t.infection_multiplier.push_back(mult);
  }
  if (t.ids.empty()) throw DataError("district CSV has no rows");
  return t;
}

CellMap read_cellmap_csv(std::istream& in) {
  const CsvTable csv = read_csv(in, true);
  if (csv.header.size() < 3 || csv.header[0] != "cell_ix" || csv.header[1] != "cell_iy" ||
      csv.header[2] != "stratum_id")
    throw DataError("cell-map CSV header must be cell_ix,cell_iy,stratum_id");
  CellMap map;
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    const auto& row = csv.rows[k];
    const std::size_t line = csv.lines[k];
    if (row.size() < 3) throw DataError("line " + std::to_string(line) + ": expected 3 fields");
    CellMap::Entry e{parse_index(row[0], "cell_ix", line), parse_index(row[1], "cell_iy", line), row[2]};
    map.nx = std::max(map.nx, e.ix + 1);
    map.ny = std::max(map.ny, e.iy + 1);
    map.entries.push_back(std::move(e));
  }
  if (map.entries.empty()) throw DataError("cell-map CSV has no rows");
  return map;
}

void write_district_csv(std::ostream& out, const DistrictTable& t) {
  out << "id,population,cases,infection_multiplier\n";
  for (std::size_t d = 0; d < t.ids.size(); ++d)
    out << t.ids[d] << ',' << format_real(t.population[d]) << ',' << format_real(t.cases[d]) << ','
        << format_real(t.infection_multiplier[d]) << '\n';
}

void write_cellmap_csv(std::ostream& out, const CellMap& map) {
  out << "cell_ix,cell_iy,stratum_id\n";
  for (const auto& e : map.entries) out << e.ix << ',' << e.iy << ',' << e.id << '\n';
}

StratifiedScenario district_scenario(const DistrictTable& table, const CellMap& map,
                                     double gamma_check) {
  std::map<std::string, int> index;
  for (std::size_t d = 0; d < table.ids.size(); ++d) index[table.ids[d]] = static_cast<int>(d);

  const std::size_t cells = map.nx * map.ny;
  std::vector<int> labels(cells, -1);
  std::vector<std::size_t> count(table.ids.size(), 0);
  std::set<std::string> unknown;
  std::vector<std::string> duplicates;
  for (const auto& e : map.entries) {
    auto it = index.find(e.id);
    if (it == index.end()) {
      unknown.insert(e.id);
      continue;
    }
    const std::size_t c = e.iy * map.nx + e.ix;
    if (labels[c] != -1) {
      duplicates.push_back("(" + std::to_string(e.ix) + "," + std::to_string(e.iy) + ")");
      continue;
    }
    labels[c] = it->second;
    ++count[static_cast<std::size_t>(it->second)];
  }
  std::vector<std::string> problems;
  if (!unknown.empty())
    problems.push_back("unknown district ids in cell map: " +
                       join(std::vector<std::string>(unknown.begin(), unknown.end())));
  std::vector<std::string> unmapped;
  for (std::size_t d = 0; d < table.ids.size(); ++d)
    if (count[d] == 0) unmapped.push_back(table.ids[d]);
  if (!unmapped.empty()) problems.push_back("districts without cells: " + join(unmapped));
  if (!duplicates.empty()) problems.push_back("cells mapped twice: " + join(duplicates));
  if (!problems.empty()) {
    std::string msg = "district ingestion failed: ";
    for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
    throw DataError(msg);
  }

  std::vector<bool> mask(cells);
  for (std::size_t c = 0; c < cells; ++c) mask[c] = labels[c] >= 0;
  const Region region(0.0, 0.0, 1.0, 1.0, map.nx, map.ny, std::move(mask));
  const double area = region.cell_area();
  std::vector<double> pop(cells, 0.0), diag(cells, 0.0), inf(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    if (labels[c] < 0) continue;
    const auto d = static_cast<std::size_t>(labels[c]);
    const double cell_share = 1.0 / (static_cast<double>(count[d]) * area);
    pop[c] = table.population[d] * cell_share;
    diag[c] = table.cases[d] * cell_share;
    inf[c] = table.cases[d] * table.infection_multiplier[d] * cell_share;
  }
  StratifiedScenario out;
  out.scenario = Scenario{GridDensity(region, std::move(pop)), GridDensity(region, std::move(diag)),
                          GridDensity(region, std::move(inf)), gamma_check};
  out.scenario.validate();
  out.stratum_ids = table.ids;
  out.cell_labels = std::move(labels);
  return out;
}

SyntheticDistricts synthetic_districts(std::uint64_t seed, std::size_t districts, std::size_t nx,
                                       std::size_t ny) {
  Rng rng = stream_rng(seed, {0x6469737472ULL});
  // Irregular region: an ellipse with a bite taken out of one side.
  auto inside = [&](std::size_t ix, std::size_t iy) {
    const double x = (static_cast<double>(ix) + 0.5) / static_cast<double>(nx) - 0.5;
    const double y = (static_cast<double>(iy) + 0.5) / static_cast<double>(ny) - 0.5;
    const bool ellipse = x * x / 0.25 + y * y / 0.25 <= 1.0;
    const bool bite = (x - 0.42) * (x - 0.42) + (y + 0.3) * (y + 0.3) < 0.02;
    return ellipse && !bite;
  };
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix)
      if (inside(ix, iy)) cells.emplace_back(ix, iy);
  if (cells.size() < districts) throw ConfigError("grid too small for the requested districts");

  // Seeds on distinct inside cells.
  std::vector<std::size_t> seeds;
  std::set<std::size_t> used;
  while (seeds.size() < districts) {
    const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(cells.size()));
    if (used.insert(k).second) seeds.push_back(k);
  }

  SyntheticDistricts out;
  out.map.nx = nx;
  out.map.ny = ny;
  auto id_of = [](std::size_t d) { return "D" + std::string(d < 10 ? "0" : "") + std::to_string(d); };
  for (const auto& [ix, iy] : cells) {
    std::size_t best = 0;
    double best_d2 = 0.0;
    for (std::size_t d = 0; d < districts; ++d) {
      const double dx = static_cast<double>(ix) - static_cast<double>(cells[seeds[d]].first);
      const double dy = static_cast<double>(iy) - static_cast<double>(cells[seeds[d]].second);
      const double d2 = dx * dx + dy * dy;
      if (d == 0 || d2 < best_d2) {
        best = d;
        best_d2 = d2;
      }
    }
    out.map.entries.push_back({ix, iy, id_of(best)});
  }

  // Heavy-tailed populations summing to ~331 million; case rates 4%..14%,
  // infections 1.0x..1.12x of cases.
  std::vector<double> weight(districts);
  double weight_sum = 0.0;
  for (auto& w : weight) {
    w = std::exp(1.2 * normal_quantile(0.001 + 0.998 * uniform01(rng)));
    weight_sum += w;
  }
  for (std::size_t d = 0; d < districts; ++d) {
    const double pop = std::round(331e6 * weight[d] / weight_sum);
    const double rate = 0.04 + 0.10 * uniform01(rng);
    out.table.ids.push_back(id_of(d));
    out.table.population.push_back(pop);
    out.table.cases.push_back(std::round(pop * rate));
    out.table.infection_multiplier.push_back(1.0 + 0.12 * uniform01(rng));
  }
  return out;
}

}  // namespace prevmap
