#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "prevmap/density.hpp"

namespace prevmap {

// Grid schema:
//   {"nx":int, "ny":int, "bounds":[x0,y0,x1,y1], "mask":[bool...], "values":[real...]}
// "mask" and "bounds" are optional (all-inside, unit square).
// Scenario schema:
//   {"pop":grid, "diag":grid, "inf":grid, "gamma_check":real}

GridDensity grid_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const GridDensity& d);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

/// Parses a file; throws DataError for unreadable or malformed input.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace prevmap
