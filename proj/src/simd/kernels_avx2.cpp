#include "prevmap/simd/kernels.hpp"

#if PREVMAP_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// Compiled with per-function target attributes so the rest of the library
// stays baseline x86-64. Do not enable FMA here: the lookup kernel must round
// exactly like the scalar version.
#define PREVMAP_AVX2 __attribute__((target("avx2")))

namespace prevmap::simd::avx2 {

namespace {

PREVMAP_AVX2 inline __m128i axis_cells(__m256d coord, __m256d shift, __m256d count,
                                       __m128i last) {
  const __m256d t = _mm256_add_pd(coord, shift);
  const __m256d wrapped = _mm256_sub_pd(t, _mm256_round_pd(t, _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC));
  const __m128i ix = _mm256_cvttpd_epi32(_mm256_mul_pd(wrapped, count));
  return _mm_min_epi32(ix, last);
}

PREVMAP_AVX2 inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

PREVMAP_AVX2 inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

PREVMAP_AVX2 void shifted_cell_values(std::span<const double> u, std::span<const double> v,
                                      double sx, double sy, const CellTable& table,
                                      std::span<double> out) {
  const std::size_t n = u.size();
  const __m256d shift_x = _mm256_set1_pd(sx);
  const __m256d shift_y = _mm256_set1_pd(sy);
  const __m256d count_x = _mm256_set1_pd(static_cast<double>(table.nx));
  const __m256d count_y = _mm256_set1_pd(static_cast<double>(table.ny));
  const __m128i last_x = _mm_set1_epi32(static_cast<int>(table.nx) - 1);
  const __m128i last_y = _mm_set1_epi32(static_cast<int>(table.ny) - 1);
  const __m128i stride = _mm_set1_epi32(static_cast<int>(table.nx));
  const double* base = table.values.data();

  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m128i ix = axis_cells(_mm256_loadu_pd(u.data() + j), shift_x, count_x, last_x);
    const __m128i iy = axis_cells(_mm256_loadu_pd(v.data() + j), shift_y, count_y, last_y);
    const __m128i cell = _mm_add_epi32(_mm_mullo_epi32(iy, stride), ix);
    _mm256_storeu_pd(out.data() + j, _mm256_i32gather_pd(base, cell, 8));
  }
  if (j < n)
    scalar::shifted_cell_values(u.subspan(j), v.subspan(j), sx, sy, table, out.subspan(j));
}

PREVMAP_AVX2 Cd2Sums cd2_sums(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const __m256d half = _mm256_set1_pd(0.5);
  Cd2Sums s;
  __m256d pair_acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(x[i] - 0.5);
    const double b = std::abs(y[i] - 0.5);
    s.single += (1.0 + 0.5 * a - 0.5 * a * a) * (1.0 + 0.5 * b - 0.5 * b * b);

    const __m256d xi = _mm256_set1_pd(x[i]);
    const __m256d yi = _mm256_set1_pd(y[i]);
    const __m256d base_x = _mm256_set1_pd(1.0 + 0.5 * a);
    const __m256d base_y = _mm256_set1_pd(1.0 + 0.5 * b);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d xj = _mm256_loadu_pd(x.data() + j);
      const __m256d yj = _mm256_loadu_pd(y.data() + j);
      const __m256d aj = abs_pd(_mm256_sub_pd(xj, half));
      const __m256d bj = abs_pd(_mm256_sub_pd(yj, half));
      const __m256d fx = _mm256_sub_pd(_mm256_add_pd(base_x, _mm256_mul_pd(half, aj)),
                                       _mm256_mul_pd(half, abs_pd(_mm256_sub_pd(xi, xj))));
      const __m256d fy = _mm256_sub_pd(_mm256_add_pd(base_y, _mm256_mul_pd(half, bj)),
                                       _mm256_mul_pd(half, abs_pd(_mm256_sub_pd(yi, yj))));
      pair_acc = _mm256_add_pd(pair_acc, _mm256_mul_pd(fx, fy));
    }
    for (; j < n; ++j) {
      const double aj = std::abs(x[j] - 0.5);
      const double bj = std::abs(y[j] - 0.5);
      s.pair += (1.0 + 0.5 * a + 0.5 * aj - 0.5 * std::abs(x[i] - x[j])) *
                (1.0 + 0.5 * b + 0.5 * bj - 0.5 * std::abs(y[i] - y[j]));
    }
  }
  s.pair += hsum(pair_acc);
  return s;
}

}  // namespace prevmap::simd::avx2

#endif
