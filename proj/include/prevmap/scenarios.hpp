#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prevmap/density.hpp"
#include "prevmap/random.hpp"

namespace prevmap {

// 2x2 unit-square layout used by the robust-gamma_check studies. Counts
// (x 1e4), top row first as printed:
//   population 20 | 40     cases 6 | 8
//              60 | 80           4 | 2
// Cells are stored bottom row first, so the bottom row holds 60, 80.
GridDensity series_population();
GridDensity series_cases();

/// f_I = gamma f_P + (1 - gamma) f_D.
Scenario series_e_scenario(double gamma, double gamma_check);

/// Per-cell gamma_i (bottom-left, bottom-right, top-left, top-right).
Scenario series_r_scenario(const std::array<double, 4>& gammas, double gamma_check);

/// Random scenarios for the sampler comparison: the unit square split into
/// sub-squares with uniform population; cases and infections in each follow
/// an isotropic normal centred in the sub-square, truncated to it.
struct ComparisonScenarioConfig {
  std::size_t subsquares_per_axis = 4;
  std::size_t raster = 64;
  double total_population = 8000e4;
  double cases_min = 2e4;
  double cases_max = 8e4;
  double multiplier_min = 1.0;
  double multiplier_max = 1.5;
  /// Normal sd as a fraction of the sub-square width.
  double sd_fraction = 0.25;
};

/// Scenario plus a partition into strata (one per sub-square or district).
struct StratifiedScenario {
  Scenario scenario;
  std::vector<std::string> stratum_ids;
  /// Per cell: index into stratum_ids, or -1 outside the region.
  std::vector<int> cell_labels;
};

StratifiedScenario comparison_scenario(const ComparisonScenarioConfig& config, double gamma_check,
                                       Rng& rng);

// ---------------------------------------------------------------------------
// District data.

struct DistrictTable {
  std::vector<std::string> ids;
  std::vector<double> population;
  std::vector<double> cases;
  /// Synthetic truth: infections = cases * multiplier.
  std::vector<double> infection_multiplier;
};

struct CellMap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  /// (ix, iy, district id)
  struct Entry {
    std::size_t ix;
    std::size_t iy;
    std::string id;
  };
  std::vector<Entry> entries;
};

/// CSV with header id,population,cases[,infection_multiplier]. Missing
/// multipliers take default_multiplier.
DistrictTable read_district_csv(std::istream& in, double default_multiplier);
/// CSV with header cell_ix,cell_iy,stratum_id. Grid size is max index + 1.
CellMap read_cellmap_csv(std::istream& in);

void write_district_csv(std::ostream& out, const DistrictTable& table);
void write_cellmap_csv(std::ostream& out, const CellMap& map);

/// Spreads each district's totals uniformly over its cells on the unit
/// square. Cells absent from the map are outside the region. Throws
/// DataError listing unknown ids, districts without cells and duplicate
/// cells.
StratifiedScenario district_scenario(const DistrictTable& table, const CellMap& map,
                                     double gamma_check);

/// Deterministic Voronoi partition of an irregular region into districts
/// with varied populations and case rates.
struct SyntheticDistricts {
  DistrictTable table;
  CellMap map;
};
SyntheticDistricts synthetic_districts(std::uint64_t seed, std::size_t districts = 51,
                                       std::size_t nx = 60, std::size_t ny = 40);

}  // namespace prevmap
