#pragma once

#include <cstddef>
#include <vector>

#include "prevmap/errors.hpp"

namespace prevmap {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Enclosing rectangle [x0,x1] x [y0,y1] split into nx*ny cells, plus a
/// per-cell membership mask. Cells are indexed row-major from the lower-left
/// corner: index = iy * nx + ix.
class Region {
 public:
  /// Single-cell unit square.
  Region() : Region(0.0, 0.0, 1.0, 1.0, 1, 1, {true}) {}
  Region(double x0, double y0, double x1, double y1, std::size_t nx, std::size_t ny,
         std::vector<bool> mask);
  /// Unit square, every cell inside.
  static Region unit(std::size_t nx, std::size_t ny);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double x1() const { return x1_; }
  double y1() const { return y1_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t cells() const { return nx_ * ny_; }
  double cell_area() const;
  double width() const { return x1_ - x0_; }
  double height() const { return y1_ - y0_; }
  bool inside(std::size_t cell) const { return mask_[cell]; }
  const std::vector<bool>& mask() const { return mask_; }

  /// Cell holding unit-square coordinates (u, v) in [0,1]^2. Cells are
  /// half-open; the last cell on each axis is closed.
  std::size_t cell_of_unit(double u, double v) const;
  /// Cell holding a point of the enclosing rectangle; throws DomainError
  /// outside it.
  std::size_t cell_of(Point p) const;
  Point cell_center(std::size_t cell) const;
  /// Maps unit-square coordinates affinely onto the rectangle.
  Point from_unit(double u, double v) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  double x0_, y0_, x1_, y1_;
  std::size_t nx_, ny_;
  std::vector<bool> mask_;
};

/// Piecewise-constant nonnegative density (persons per unit area).
class GridDensity {
 public:
  /// Zero on the single-cell unit square.
  GridDensity() : region_(), values_(1, 0.0) {}
  /// Validates: size match, values finite and >= 0. Values on masked-out
  /// cells are forced to 0.
  GridDensity(Region region, std::vector<double> values);
  static GridDensity constant(const Region& region, double value);

  const Region& region() const { return region_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  std::size_t cells() const { return values_.size(); }

  bool same_grid(const GridDensity& other) const { return region_ == other.region_; }

 private:
  Region region_;
  std::vector<double> values_;
};

/// f_P, f_D and (simulation ground truth) f_I on one grid, plus the
/// rough-estimate weight.
struct Scenario {
  GridDensity pop;
  GridDensity diag;
  GridDensity inf;
  double gamma_check = 0.0;

  /// Checks shared grid and 0 <= f_D <= f_I <= f_P cell-wise (relative
  /// slack of 1e-12 for round-off in convex combinations).
  void validate() const;
};

/// Sum of value * cell area.
double integrate(const GridDensity& d);

/// Value of the cell containing p; 0 on masked cells.
double evaluate(const GridDensity& d, Point p);

/// gamma_check * pop + (1 - gamma_check) * diag, cell-wise.
GridDensity rough_infection_density(const GridDensity& pop, const GridDensity& diag,
                                    double gamma_check);

struct NormalizedDensity {
  GridDensity density;
  double normalizer = 0.0;
};

/// Scales the kernel to integrate to 1. Throws ComputationError on a zero
/// integral.
NormalizedDensity sampling_density(const GridDensity& kernel);

/// inf / pop cell-wise, 0 where pop is 0. Throws DataError where inf > pop.
GridDensity local_prevalence(const GridDensity& inf, const GridDensity& pop);

/// a * d1 + b * d2 on a shared grid.
GridDensity combine(double a, const GridDensity& d1, double b, const GridDensity& d2);

GridDensity scaled(const GridDensity& d, double factor);

}  // namespace prevmap
