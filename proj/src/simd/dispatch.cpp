#include <cstdlib>
#include <string_view>

#include "prevmap/simd/kernels.hpp"

namespace prevmap::simd {

Isa detected_isa() {
#if PREVMAP_HAVE_AVX2_KERNELS
  static const bool has_avx2 = __builtin_cpu_supports("avx2");
  if (has_avx2) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* forced = std::getenv("PREVMAP_ISA");
    if (forced != nullptr && std::string_view(forced) == "scalar") return Isa::scalar;
    return detected_isa();
  }();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || detected_isa() == Isa::avx2; }

void shifted_cell_values(std::span<const double> u, std::span<const double> v, double sx,
                         double sy, const CellTable& table, std::span<double> out, Isa isa) {
#if PREVMAP_HAVE_AVX2_KERNELS
  if (isa == Isa::avx2 && isa_available(Isa::avx2))
    return avx2::shifted_cell_values(u, v, sx, sy, table, out);
#endif
  scalar::shifted_cell_values(u, v, sx, sy, table, out);
}

Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y, Isa isa) {
#if PREVMAP_HAVE_AVX2_KERNELS
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) return avx2::cd2_sums(x, y);
#endif
  return scalar::cd2_sums(x, y);
}

}  // namespace prevmap::simd
