#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "idrm/geometry.hpp"

namespace idrm {

using VoxelId = std::uint32_t;

/// Regular voxel grid. Voxel (ix, iy, iz) covers
/// [origin + res * (ix, iy, iz), origin + res * (ix + 1, iy + 1, iz + 1)).
/// Linear ids are x-fastest, then y, then z.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double resolution, const std::array<int, 3>& dims);

  /// Cube of side `extent` centred on the frame origin.
  static VoxelGrid Centered(double extent, double resolution);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  Vec3 upper() const {
    return origin_ + resolution_ * Vec3(dims_[0], dims_[1], dims_[2]);
  }
  double halfDiagonal() const;

  VoxelId linear(int ix, int iy, int iz) const {
    return static_cast<VoxelId>(ix + dims_[0] * (iy + dims_[1] * iz));
  }
  std::array<int, 3> coords(VoxelId id) const;

  /// nullopt iff p lies outside the closed grid volume.
  std::optional<VoxelId> index(const Vec3& p) const;
  Vec3 center(VoxelId id) const;
  void bounds(VoxelId id, Vec3& lo, Vec3& hi) const;

  /// Inclusive voxel coordinate range overlapped by the box [lo, hi], clipped
  /// to the grid. Returns false when the box misses the grid entirely.
  bool coordRange(const Vec3& lo, const Vec3& hi, std::array<int, 3>& first,
                  std::array<int, 3>& last) const;

  bool operator==(const VoxelGrid&) const = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
};

/// Structure-of-arrays copy of every voxel centre, in linear-id order.
struct VoxelCenters {
  std::vector<double> x, y, z;

  static VoxelCenters Of(const VoxelGrid& g);
  static VoxelCenters Transformed(const VoxelCenters& c, const Transform& t);
  std::size_t size() const { return x.size(); }
};

}  // namespace idrm
