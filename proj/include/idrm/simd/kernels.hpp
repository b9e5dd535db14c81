#pragma once

// Batched voxel-vs-primitive overlap kernels.
//
// Every kernel tests one primitive against n boxes that share an orientation
// and half extents but differ in centre (structure-of-arrays input), writing
// 1 (overlap) or 0 per box. The AVX2 variants evaluate the same expressions in
// the same order as the scalar ones and are built without FMA contraction, so
// both produce identical masks.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace idrm::simd {

/// Sphere against boxes with rotation `rot` (row-major 3x3, columns are the
/// box axes) and half extents `half`.
struct SphereBoxesArgs {
  const double* cx;
  const double* cy;
  const double* cz;
  std::size_t n;
  double rot[9];
  double half[3];
  double sphere[3];
  double radius_sq;
};

/// Fixed box against boxes, via precomputed separating axes. Boxes overlap
/// iff |axis_k . (other - c_i)| <= reach_k for every k.
struct SatBoxesArgs {
  const double* cx;
  const double* cy;
  const double* cz;
  std::size_t n;
  int axis_count;
  double axis[15][3];
  double reach[15];
  double other[3];
};

struct KernelTable {
  std::string_view name;
  void (*sphere_boxes)(const SphereBoxesArgs&, std::uint8_t* out);
  void (*sat_boxes)(const SatBoxesArgs&, std::uint8_t* out);
};

const KernelTable& scalarKernels();

/// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2.
const KernelTable* avx2Kernels();

/// Best table for this CPU. Setting IDRM_FORCE_SCALAR=1 in the environment
/// pins the scalar table. Resolved once.
const KernelTable& kernels();

namespace detail {
void sphereBoxesAvx2(const SphereBoxesArgs&, std::uint8_t* out);
void satBoxesAvx2(const SatBoxesArgs&, std::uint8_t* out);
}  // namespace detail

}  // namespace idrm::simd
