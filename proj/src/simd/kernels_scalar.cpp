#include <cmath>
#include <cstdlib>
#include <cstring>

#include "idrm/simd/kernels.hpp"

namespace idrm::simd {

namespace {

void sphereBoxesScalar(const SphereBoxesArgs& a, std::uint8_t* out) {
  const double* r = a.rot;
  for (std::size_t i = 0; i < a.n; ++i) {
    const double dx = a.sphere[0] - a.cx[i];
    const double dy = a.sphere[1] - a.cy[i];
    const double dz = a.sphere[2] - a.cz[i];
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      // Component along box axis k (column k of rot).
      const double l = r[0 + k] * dx + r[3 + k] * dy + r[6 + k] * dz;
      double q = std::fabs(l) - a.half[k];
      q = q > 0.0 ? q : 0.0;
      d2 = d2 + q * q;
    }
    out[i] = d2 <= a.radius_sq ? 1 : 0;
  }
}

void satBoxesScalar(const SatBoxesArgs& a, std::uint8_t* out) {
  for (std::size_t i = 0; i < a.n; ++i) {
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

const KernelTable kScalar{"scalar", &sphereBoxesScalar, &satBoxesScalar};

#if defined(IDRM_HAVE_AVX2)
const KernelTable kAvx2{"avx2", &detail::sphereBoxesAvx2, &detail::satBoxesAvx2};

bool cpuHasAvx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}
#endif

}  // namespace

const KernelTable& scalarKernels() { return kScalar; }

const KernelTable* avx2Kernels() {
#if defined(IDRM_HAVE_AVX2)
  static const bool ok = cpuHasAvx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  static const KernelTable* chosen = [] {
    const char* force = std::getenv("IDRM_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0) return &kScalar;
    const KernelTable* v = avx2Kernels();
    return v != nullptr ? v : &kScalar;
  }();
  return *chosen;
}

}  // namespace idrm::simd
