#include <algorithm>
#include <cmath>

#include "prevmap/simd/kernels.hpp"

namespace prevmap::simd::scalar {

namespace {

inline std::size_t axis_cell(double unit, std::size_t count) {
  const auto ix = static_cast<std::size_t>(unit * static_cast<double>(count));
  return std::min(ix, count - 1);
}

}  // namespace

void shifted_cell_values(std::span<const double> u, std::span<const double> v, double sx,
                         double sy, const CellTable& table, std::span<double> out) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    const std::size_t ix = axis_cell(wrap_add(u[j], sx), table.nx);
    const std::size_t iy = axis_cell(wrap_add(v[j], sy), table.ny);
    out[j] = table.values[iy * table.nx + ix];
  }
}

Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y) {
  Cd2Sums s;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(x[i] - 0.5);
    const double b = std::abs(y[i] - 0.5);
    s.single += (1.0 + 0.5 * a - 0.5 * a * a) * (1.0 + 0.5 * b - 0.5 * b * b);
    for (std::size_t j = 0; j < n; ++j) {
      const double aj = std::abs(x[j] - 0.5);
      const double bj = std::abs(y[j] - 0.5);
      s.pair += (1.0 + 0.5 * a + 0.5 * aj - 0.5 * std::abs(x[i] - x[j])) *
                (1.0 + 0.5 * b + 0.5 * bj - 0.5 * std::abs(y[i] - y[j]));
    }
  }
  return s;
}

}  // namespace prevmap::simd::scalar
