#include "prevmap/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace prevmap {

namespace {

std::size_t axis_index(double unit, std::size_t count) {
  const double scaled = unit * static_cast<double>(count);
  if (!(scaled > 0.0)) return 0;
  const auto ix = static_cast<std::size_t>(scaled);
  return std::min(ix, count - 1);
}

void require_same_grid(const GridDensity& a, const GridDensity& b, const char* what) {
  if (!a.same_grid(b)) throw ConfigError(std::string(what) + ": densities are on different grids");
}

}  // namespace

Region::Region(double x0, double y0, double x1, double y1, std::size_t nx, std::size_t ny,
               std::vector<bool> mask)
    : x0_(x0), y0_(y0), x1_(x1), y1_(y1), nx_(nx), ny_(ny), mask_(std::move(mask)) {
  if (!(x0 < x1) || !(y0 < y1)) throw DataError("region bounds must satisfy x0 < x1 and y0 < y1");
  if (nx == 0 || ny == 0) throw DataError("region must have at least one cell per axis");
  if (mask_.size() != nx * ny)
    throw DataError("mask length " + std::to_string(mask_.size()) + " does not match " +
                    std::to_string(nx) + "x" + std::to_string(ny) + " cells");
  if (std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; }))
    throw DataError("region mask has no cell inside the region");
}

Region Region::unit(std::size_t nx, std::size_t ny) {
  return Region(0.0, 0.0, 1.0, 1.0, nx, ny, std::vector<bool>(nx * ny, true));
}

double Region::cell_area() const {
  return (width() / static_cast<double>(nx_)) * (height() / static_cast<double>(ny_));
}

std::size_t Region::cell_of_unit(double u, double v) const {
  return axis_index(v, ny_) * nx_ + axis_index(u, nx_);
}

std::size_t Region::cell_of(Point p) const {
  if (!(p.x >= x0_ && p.x <= x1_ && p.y >= y0_ && p.y <= y1_))
    throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies outside the enclosing rectangle");
  return cell_of_unit((p.x - x0_) / width(), (p.y - y0_) / height());
}

Point Region::cell_center(std::size_t cell) const {
  const double ix = static_cast<double>(cell % nx_);
  const double iy = static_cast<double>(cell / nx_);
  return {x0_ + (ix + 0.5) * width() / static_cast<double>(nx_),
          y0_ + (iy + 0.5) * height() / static_cast<double>(ny_)};
}

Point Region::from_unit(double u, double v) const {
  return {x0_ + u * width(), y0_ + v * height()};
}

GridDensity::GridDensity(Region region, std::vector<double> values)
    : region_(std::move(region)), values_(std::move(values)) {
  if (values_.size() != region_.cells())
    throw DataError("density has " + std::to_string(values_.size()) + " values for " +
                    std::to_string(region_.cells()) + " cells");
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (!std::isfinite(values_[c]) || values_[c] < 0.0)
      throw DataError("density value at cell (" + std::to_string(c % region_.nx()) + ", " +
                      std::to_string(c / region_.nx()) + ") is negative or not finite");
    if (!region_.inside(c)) values_[c] = 0.0;
  }
}

GridDensity GridDensity::constant(const Region& region, double value) {
  return GridDensity(region, std::vector<double>(region.cells(), value));
}

void Scenario::validate() const {
  require_same_grid(pop, diag, "scenario");
  require_same_grid(pop, inf, "scenario");
  if (gamma_check < 0.0 || gamma_check > 1.0) throw ConfigError("gamma_check must lie in [0, 1]");
  for (std::size_t c = 0; c < pop.cells(); ++c) {
    const double slack = 1e-12 * pop[c];
    if (diag[c] > inf[c] + slack || inf[c] > pop[c] + slack)
      throw DataError("scenario violates 0 <= f_D <= f_I <= f_P at cell (" +
                      std::to_string(c % pop.region().nx()) + ", " +
                      std::to_string(c / pop.region().nx()) + ")");
  }
}

double integrate(const GridDensity& d) {
  double sum = 0.0;
  for (double v : d.values()) sum += v;
  return sum * d.region().cell_area();
}

double evaluate(const GridDensity& d, Point p) { return d[d.region().cell_of(p)]; }

GridDensity rough_infection_density(const GridDensity& pop, const GridDensity& diag,
                                    double gamma_check) {
  if (gamma_check < 0.0 || gamma_check > 1.0) throw ConfigError("gamma_check must lie in [0, 1]");
  return combine(gamma_check, pop, 1.0 - gamma_check, diag);
}

NormalizedDensity sampling_density(const GridDensity& kernel) {
  const double total = integrate(kernel);
  if (!(total > 0.0)) throw ComputationError("sampling kernel integrates to zero");
  std::vector<double> values(kernel.values());
  for (double& v : values) v /= total;
  return {GridDensity(kernel.region(), std::move(values)), total};
}

GridDensity local_prevalence(const GridDensity& inf, const GridDensity& pop) {
  require_same_grid(inf, pop, "local_prevalence");
  std::vector<double> p(pop.cells(), 0.0);
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (inf[c] > pop[c] * (1.0 + 1e-12))
      throw DataError("infection density exceeds population density at cell (" +
                      std::to_string(c % pop.region().nx()) + ", " +
                      std::to_string(c / pop.region().nx()) + ")");
    if (pop[c] > 0.0) p[c] = std::min(1.0, inf[c] / pop[c]);
  }
  return GridDensity(pop.region(), std::move(p));
}

GridDensity combine(double a, const GridDensity& d1, double b, const GridDensity& d2) {
  require_same_grid(d1, d2, "combine");
  std::vector<double> out(d1.cells());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = a * d1[c] + b * d2[c];
  return GridDensity(d1.region(), std::move(out));
}

GridDensity scaled(const GridDensity& d, double factor) {
  std::vector<double> out(d.values());
  for (double& v : out) v *= factor;
  return GridDensity(d.region(), std::move(out));
}

}  // namespace prevmap
