#include "prevmap/grid_io.hpp"

#include <fstream>

namespace prevmap {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

GridDensity grid_from_json(const json& j) {
  if (!j.is_object()) throw DataError("grid must be a JSON object");
  const auto nx = field<long long>(j, "nx");
  const auto ny = field<long long>(j, "ny");
  if (nx <= 0 || ny <= 0) throw DataError("nx and ny must be positive");
  const auto cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);

  std::vector<double> bounds{0.0, 0.0, 1.0, 1.0};
  if (j.contains("bounds")) {
    bounds = field<std::vector<double>>(j, "bounds");
    if (bounds.size() != 4) throw DataError("bounds must have 4 entries [x0,y0,x1,y1]");
  }
  std::vector<bool> mask(cells, true);
  if (j.contains("mask")) {
    mask = field<std::vector<bool>>(j, "mask");
    if (mask.size() != cells)
      throw DataError("mask has " + std::to_string(mask.size()) + " entries, expected " +
                      std::to_string(cells));
  }
  auto values = field<std::vector<double>>(j, "values");
  if (values.size() != cells)
    throw DataError("values has " + std::to_string(values.size()) + " entries, expected " +
                    std::to_string(cells));
  Region region(bounds[0], bounds[1], bounds[2], bounds[3], static_cast<std::size_t>(nx),
                static_cast<std::size_t>(ny), std::move(mask));
  return GridDensity(std::move(region), std::move(values));
}

json grid_to_json(const GridDensity& d) {
  const Region& r = d.region();
  json j;
  j["nx"] = r.nx();
  j["ny"] = r.ny();
  j["bounds"] = {r.x0(), r.y0(), r.x1(), r.y1()};
  j["mask"] = r.mask();
  j["values"] = d.values();
  return j;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw DataError("scenario must be a JSON object");
  for (const char* key : {"pop", "diag", "inf"})
    if (!j.contains(key)) throw DataError(std::string("scenario is missing \"") + key + "\"");
  Scenario s{grid_from_json(j.at("pop")), grid_from_json(j.at("diag")),
             grid_from_json(j.at("inf")), j.value("gamma_check", 0.0)};
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["pop"] = grid_to_json(s.pop);
  j["diag"] = grid_to_json(s.diag);
  j["inf"] = grid_to_json(s.inf);
  j["gamma_check"] = s.gamma_check;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace prevmap
