#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prevmap/density.hpp"

namespace prevmap {

/// M points in [0,1)^2 stored structure-of-arrays for the lookup kernels.
struct DesignPointSet {
  std::vector<double> u;
  std::vector<double> v;
  /// e.g. "rank-1 lattice m=210 h=..."; free text.
  std::string generator_info;

  std::size_t size() const { return u.size(); }
  Point at(std::size_t j) const { return {u[j], v[j]}; }
};

struct ShiftVector {
  double sx = 0.0;
  double sy = 0.0;
};

/// Generator h of the rank-1 lattice {(k/m, {k h / m})} with the smallest
/// centered L2 discrepancy among h coprime to m; ties go to the smaller h.
std::size_t best_lattice_generator(std::size_t m);

DesignPointSet rank1_lattice(std::size_t m, std::size_t h);

/// Size-m uniform design. The seed is accepted for interface stability but
/// lattices are deterministic and ignore it.
DesignPointSet generate_design(std::size_t m, std::optional<unsigned long long> seed = std::nullopt);

/// Component-wise addition modulo 1.
DesignPointSet shift(const DesignPointSet& d, ShiftVector s);

double centered_l2_discrepancy(const DesignPointSet& d);

/// One "x,y" row per point, with header.
void write_design_csv(std::ostream& out, const DesignPointSet& d);

}  // namespace prevmap
