#include "prevmap/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "prevmap/csv.hpp"
#include "prevmap/simd/kernels.hpp"

namespace prevmap {

namespace {

double squared_cd2(const simd::Cd2Sums& s, std::size_t n) {
  const double nn = static_cast<double>(n);
  return (13.0 / 12.0) * (13.0 / 12.0) - 2.0 / nn * s.single + s.pair / (nn * nn);
}

// The closed form cancels O(1) terms, so rounding noise in the squared value
// is absolute, a few 1e-16. Candidates closer than this are exact ties
// (e.g. h and its inverse mod m give transposed lattices).
constexpr double kCd2SquaredTieBand = 1e-12;

}  // namespace

DesignPointSet rank1_lattice(std::size_t m, std::size_t h) {
  DesignPointSet d;
  d.u.resize(m);
  d.v.resize(m);
  const double md = static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    d.u[k] = static_cast<double>(k) / md;
    d.v[k] = static_cast<double>((k * h) % m) / md;
  }
  d.generator_info = "rank-1 lattice m=" + std::to_string(m) + " h=" + std::to_string(h);
  return d;
}

std::size_t best_lattice_generator(std::size_t m) {
  if (m < 2) throw ConfigError("uniform design needs m >= 2");
  std::size_t best_h = 0;
  double best = 0.0;
  for (std::size_t h = 1; h < m; ++h) {
    if (std::gcd(h, m) != 1) continue;
    const DesignPointSet d = rank1_lattice(m, h);
    const double cd2 = squared_cd2(simd::cd2_sums(d.u, d.v), m);
    if (best_h == 0 || cd2 < best - kCd2SquaredTieBand) {
      best_h = h;
      best = cd2;
    }
  }
  return best_h;
}

DesignPointSet generate_design(std::size_t m, std::optional<unsigned long long> /*seed*/) {
  return rank1_lattice(m, best_lattice_generator(m));
}

DesignPointSet shift(const DesignPointSet& d, ShiftVector s) {
  DesignPointSet out = d;
  for (std::size_t j = 0; j < d.size(); ++j) {
    out.u[j] = simd::wrap_add(d.u[j], s.sx);
    out.v[j] = simd::wrap_add(d.v[j], s.sy);
  }
  return out;
}

double centered_l2_discrepancy(const DesignPointSet& d) {
  return std::sqrt(std::max(squared_cd2(simd::cd2_sums(d.u, d.v), d.size()), 0.0));
}

void write_design_csv(std::ostream& out, const DesignPointSet& d) {
  out << "x,y\n";
  for (std::size_t j = 0; j < d.size(); ++j)
    out << format_real(d.u[j]) << ',' << format_real(d.v[j]) << '\n';
}

}  // namespace prevmap
