// Built with -mavx2 only (no -mfma): products and sums must round exactly as
// in the scalar kernels.
#include <immintrin.h>

#include <cmath>

#include "idrm/simd/kernels.hpp"

namespace idrm::simd::detail {

namespace {

inline __m256d absPd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// Low 4 bits of `mask` -> four 0/1 bytes.
inline void storeMask4(int mask, std::uint8_t* out) {
  out[0] = static_cast<std::uint8_t>(mask & 1);
  out[1] = static_cast<std::uint8_t>((mask >> 1) & 1);
  out[2] = static_cast<std::uint8_t>((mask >> 2) & 1);
  out[3] = static_cast<std::uint8_t>((mask >> 3) & 1);
}

}  // namespace

void sphereBoxesAvx2(const SphereBoxesArgs& a, std::uint8_t* out) {
  const double* r = a.rot;
  const __m256d sx = _mm256_set1_pd(a.sphere[0]);
  const __m256d sy = _mm256_set1_pd(a.sphere[1]);
  const __m256d sz = _mm256_set1_pd(a.sphere[2]);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d rsq = _mm256_set1_pd(a.radius_sq);
  __m256d col[3][3];
  __m256d half[3];
  for (int k = 0; k < 3; ++k) {
    col[k][0] = _mm256_set1_pd(r[0 + k]);
    col[k][1] = _mm256_set1_pd(r[3 + k]);
    col[k][2] = _mm256_set1_pd(r[6 + k]);
    half[k] = _mm256_set1_pd(a.half[k]);
  }

  std::size_t i = 0;
  for (; i + 4 <= a.n; i += 4) {
    const __m256d dx = _mm256_sub_pd(sx, _mm256_loadu_pd(a.cx + i));
    const __m256d dy = _mm256_sub_pd(sy, _mm256_loadu_pd(a.cy + i));
    const __m256d dz = _mm256_sub_pd(sz, _mm256_loadu_pd(a.cz + i));
    __m256d d2 = zero;
    for (int k = 0; k < 3; ++k) {
      __m256d l = _mm256_mul_pd(col[k][0], dx);
      l = _mm256_add_pd(l, _mm256_mul_pd(col[k][1], dy));
      l = _mm256_add_pd(l, _mm256_mul_pd(col[k][2], dz));
      __m256d q = _mm256_sub_pd(absPd(l), half[k]);
      q = _mm256_max_pd(q, zero);
      d2 = _mm256_add_pd(d2, _mm256_mul_pd(q, q));
    }
    storeMask4(_mm256_movemask_pd(_mm256_cmp_pd(d2, rsq, _CMP_LE_OQ)), out + i);
  }
  for (; i < a.n; ++i) {
    const double dx = a.sphere[0] - a.cx[i];
    const double dy = a.sphere[1] - a.cy[i];
    const double dz = a.sphere[2] - a.cz[i];
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double l = r[0 + k] * dx + r[3 + k] * dy + r[6 + k] * dz;
      double q = std::fabs(l) - a.half[k];
      q = q > 0.0 ? q : 0.0;
      d2 = d2 + q * q;
    }
    out[i] = d2 <= a.radius_sq ? 1 : 0;
  }
}

void satBoxesAvx2(const SatBoxesArgs& a, std::uint8_t* out) {
  const __m256d ox = _mm256_set1_pd(a.other[0]);
  const __m256d oy = _mm256_set1_pd(a.other[1]);
  const __m256d oz = _mm256_set1_pd(a.other[2]);

  std::size_t i = 0;
  for (; i + 4 <= a.n; i += 4) {
    const __m256d dx = _mm256_sub_pd(ox, _mm256_loadu_pd(a.cx + i));
    const __m256d dy = _mm256_sub_pd(oy, _mm256_loadu_pd(a.cy + i));
    const __m256d dz = _mm256_sub_pd(oz, _mm256_loadu_pd(a.cz + i));
    __m256d separated = _mm256_setzero_pd();
    for (int k = 0; k < a.axis_count; ++k) {
      __m256d p = _mm256_mul_pd(_mm256_set1_pd(a.axis[k][0]), dx);
      p = _mm256_add_pd(p, _mm256_mul_pd(_mm256_set1_pd(a.axis[k][1]), dy));
      p = _mm256_add_pd(p, _mm256_mul_pd(_mm256_set1_pd(a.axis[k][2]), dz));
      separated = _mm256_or_pd(
          separated, _mm256_cmp_pd(absPd(p), _mm256_set1_pd(a.reach[k]), _CMP_GT_OQ));
      if (_mm256_movemask_pd(separated) == 0xF) break;
    }
    storeMask4(~_mm256_movemask_pd(separated) & 0xF, out + i);
  }
  for (; i < a.n; ++i) {
    const double dx = a.other[0] - a.cx[i];
    const double dy = a.other[1] - a.cy[i];
    const double dz = a.other[2] - a.cz[i];
    std::uint8_t hit = 1;
    for (int k = 0; k < a.axis_count; ++k) {
      const double p = a.axis[k][0] * dx + a.axis[k][1] * dy + a.axis[k][2] * dz;
      if (std::fabs(p) > a.reach[k]) {
        hit = 0;
        break;
      }
    }
    out[i] = hit;
  }
}

}  // namespace idrm::simd::detail
