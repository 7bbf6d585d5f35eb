#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version selected at runtime. The lookup kernel is
// bit-identical across variants; the discrepancy sums agree to rounding.

namespace prevmap::simd {

enum class Isa { scalar, avx2 };

/// Best variant the running CPU supports.
Isa detected_isa();
/// detected_isa() unless PREVMAP_ISA=scalar is set in the environment.
Isa active_isa();
const char* isa_name(Isa isa);
bool isa_available(Isa isa);

/// Row-major cell table over the unit square (index = iy * nx + ix).
struct CellTable {
  std::span<const double> values;
  std::size_t nx = 0;
  std::size_t ny = 0;
};

/// Unit-square coordinate after adding a shift modulo 1.
inline double wrap_add(double coord, double shift) {
  const double t = coord + shift;
  return t - __builtin_floor(t);
}

/// out[j] = table value of the cell holding (u[j] (+) sx, v[j] (+) sy), where
/// (+) is addition modulo 1. Cells are half-open, the last one closed.
void shifted_cell_values(std::span<const double> u, std::span<const double> v, double sx,
                         double sy, const CellTable& table, std::span<double> out,
                         Isa isa = active_isa());

struct Cd2Sums {
  /// sum_i prod_k (1 + |x_ik - 1/2|/2 - |x_ik - 1/2|^2/2)
  double single = 0.0;
  /// sum_i sum_j prod_k (1 + |x_ik - 1/2|/2 + |x_jk - 1/2|/2 - |x_ik - x_jk|/2)
  double pair = 0.0;
};

/// Both sums of the closed-form centered L2 discrepancy of a 2-D point set.
Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y, Isa isa = active_isa());

namespace scalar {
void shifted_cell_values(std::span<const double> u, std::span<const double> v, double sx,
                         double sy, const CellTable& table, std::span<double> out);
Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PREVMAP_HAVE_AVX2_KERNELS 1
namespace avx2 {
void shifted_cell_values(std::span<const double> u, std::span<const double> v, double sx,
                         double sy, const CellTable& table, std::span<double> out);
Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y);
}  // namespace avx2
#else
#define PREVMAP_HAVE_AVX2_KERNELS 0
#endif

}  // namespace prevmap::simd
