#include "idrm/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "idrm/error.hpp"

namespace idrm {

VoxelGrid::VoxelGrid(const Vec3& origin, double resolution, const std::array<int, 3>& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0)) throw Error("voxel grid: resolution must be positive");
  for (int d : dims) {
    if (d <= 0) throw Error("voxel grid: dims must be positive");
  }
}

VoxelGrid VoxelGrid::Centered(double extent, double resolution) {
  if (!(extent > 0) || !(resolution > 0)) throw Error("voxel grid: extent and resolution must be positive");
  const int n = static_cast<int>(std::lround(extent / resolution));
  if (n <= 0) throw Error("voxel grid: extent smaller than one voxel");
  const double half = 0.5 * n * resolution;
  return VoxelGrid(Vec3::Constant(-half), resolution, {n, n, n});
}

double VoxelGrid::halfDiagonal() const { return 0.5 * std::sqrt(3.0) * resolution_; }

std::array<int, 3> VoxelGrid::coords(VoxelId id) const {
  const int ix = static_cast<int>(id % dims_[0]);
  const int rest = static_cast<int>(id / dims_[0]);
  return {ix, rest % dims_[1], rest / dims_[1]};
}

std::optional<VoxelId> VoxelGrid::index(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - origin_[a]) / resolution_;
    if (!(u >= 0.0) || u > dims_[a]) return std::nullopt;
    c[a] = std::min(static_cast<int>(std::floor(u)), dims_[a] - 1);
  }
  return linear(c[0], c[1], c[2]);
}

Vec3 VoxelGrid::center(VoxelId id) const {
  const auto c = coords(id);
  return origin_ + resolution_ * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

void VoxelGrid::bounds(VoxelId id, Vec3& lo, Vec3& hi) const {
  const auto c = coords(id);
  lo = origin_ + resolution_ * Vec3(c[0], c[1], c[2]);
  hi = lo + Vec3::Constant(resolution_);
}

bool VoxelGrid::coordRange(const Vec3& lo, const Vec3& hi, std::array<int, 3>& first,
                           std::array<int, 3>& last) const {
  for (int a = 0; a < 3; ++a) {
    const double l = (lo[a] - origin_[a]) / resolution_;
    const double h = (hi[a] - origin_[a]) / resolution_;
    if (h < 0.0 || l > dims_[a]) return false;
    first[a] = std::clamp(static_cast<int>(std::floor(l)), 0, dims_[a] - 1);
    last[a] = std::clamp(static_cast<int>(std::floor(h)), 0, dims_[a] - 1);
  }
  return true;
}

VoxelCenters VoxelCenters::Of(const VoxelGrid& g) {
  VoxelCenters c;
  const std::size_t n = g.count();
  c.x.resize(n);
  c.y.resize(n);
  c.z.resize(n);
  for (VoxelId i = 0; i < n; ++i) {
    const Vec3 p = g.center(i);
    c.x[i] = p.x();
    c.y[i] = p.y();
    c.z[i] = p.z();
  }
  return c;
}

VoxelCenters VoxelCenters::Transformed(const VoxelCenters& c, const Transform& t) {
  VoxelCenters out;
  const std::size_t n = c.size();
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = t.apply(Vec3(c.x[i], c.y[i], c.z[i]));
    out.x[i] = p.x();
    out.y[i] = p.y();
    out.z[i] = p.z();
  }
  return out;
}

}  // namespace idrm
