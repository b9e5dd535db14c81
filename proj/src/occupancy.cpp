#include "idrm/occupancy.hpp"

#include <algorithm>
#include <bit>

#include "idrm/simd/kernels.hpp"

namespace idrm {

namespace {

void fillRotation(const Mat3& r, double out[9]) {
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) out[row * 3 + col] = r(row, col);
}

simd::SatBoxesArgs satArgs(const SatAxes& axes, const Vec3& other) {
  simd::SatBoxesArgs a{};
  a.axis_count = axes.count;
  for (int k = 0; k < axes.count; ++k) {
    for (int d = 0; d < 3; ++d) a.axis[k][d] = axes.axis[k][d];
    a.reach[k] = axes.reach[k];
  }
  for (int d = 0; d < 3; ++d) a.other[d] = other[d];
  return a;
}

// Runs `kernel` on each x-row of the voxel block [first, last].
template <typename Args, typename Kernel>
void forEachRow(const VoxelGrid& g, const VoxelCenters& c, const std::array<int, 3>& first,
                const std::array<int, 3>& last, Args args, Kernel kernel,
                std::vector<std::uint8_t>& row_mask, std::vector<std::uint8_t>& mask) {
  const std::size_t len = static_cast<std::size_t>(last[0] - first[0] + 1);
  row_mask.resize(len);
  for (int iz = first[2]; iz <= last[2]; ++iz) {
    for (int iy = first[1]; iy <= last[1]; ++iy) {
      const VoxelId start = g.linear(first[0], iy, iz);
      args.cx = c.x.data() + start;
      args.cy = c.y.data() + start;
      args.cz = c.z.data() + start;
      args.n = len;
      kernel(args, row_mask.data());
      for (std::size_t i = 0; i < len; ++i) mask[start + i] |= row_mask[i];
    }
  }
}

}  // namespace

VoxelLists VoxelLists::FromSampleVoxels(std::size_t voxel_count,
                                        const std::vector<std::vector<VoxelId>>& per_sample) {
  VoxelLists out;
  out.offsets.assign(voxel_count + 1, 0);
  for (const auto& vs : per_sample)
    for (VoxelId v : vs) ++out.offsets[v + 1];
  for (std::size_t v = 0; v < voxel_count; ++v) out.offsets[v + 1] += out.offsets[v];
  out.entries.resize(out.offsets.back());
  std::vector<std::uint64_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  for (std::size_t n = 0; n < per_sample.size(); ++n)
    for (VoxelId v : per_sample[n]) out.entries[cursor[v]++] = static_cast<SampleId>(n);
  return out;
}

void voxelizeSpheres(const VoxelGrid& g, const VoxelCenters& centers,
                     std::span<const WorldSphere> spheres, std::vector<VoxelId>& out) {
  const auto& k = simd::kernels();
  std::vector<std::uint8_t> row;
  const std::size_t start = out.size();
  simd::SphereBoxesArgs a{};
  fillRotation(Mat3::Identity(), a.rot);
  const double h = 0.5 * g.resolution();
  a.half[0] = a.half[1] = a.half[2] = h;
  for (const auto& s : spheres) {
    std::array<int, 3> first{}, last{};
    const Vec3 r = Vec3::Constant(s.radius);
    if (!g.coordRange(s.center - r, s.center + r, first, last)) continue;
    a.sphere[0] = s.center.x();
    a.sphere[1] = s.center.y();
    a.sphere[2] = s.center.z();
    a.radius_sq = s.radius * s.radius;
    const std::size_t len = static_cast<std::size_t>(last[0] - first[0] + 1);
    row.resize(len);
    for (int iz = first[2]; iz <= last[2]; ++iz) {
      for (int iy = first[1]; iy <= last[1]; ++iy) {
        const VoxelId v0 = g.linear(first[0], iy, iz);
        a.cx = centers.x.data() + v0;
        a.cy = centers.y.data() + v0;
        a.cz = centers.z.data() + v0;
        a.n = len;
        k.sphere_boxes(a, row.data());
        for (std::size_t i = 0; i < len; ++i)
          if (row[i]) out.push_back(v0 + static_cast<VoxelId>(i));
      }
    }
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(start), out.end());
  out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(start), out.end()), out.end());
}

void occupiedVoxelsGridFrame(const VoxelGrid& g, const VoxelCenters& centers,
                             std::span<const Obstacle> obstacles, std::vector<std::uint8_t>& mask) {
  const auto& k = simd::kernels();
  mask.assign(g.count(), 0);
  std::vector<std::uint8_t> row;
  const double h = 0.5 * g.resolution();
  const Vec3 half = Vec3::Constant(h);
  for (const auto& o : obstacles) {
    Vec3 lo, hi;
    o.aabb(lo, hi);
    std::array<int, 3> first{}, last{};
    if (!g.coordRange(lo, hi, first, last)) continue;
    if (const auto* s = std::get_if<Sphere>(&o.shape)) {
      simd::SphereBoxesArgs a{};
      fillRotation(Mat3::Identity(), a.rot);
      a.half[0] = a.half[1] = a.half[2] = h;
      for (int d = 0; d < 3; ++d) a.sphere[d] = s->center[d];
      a.radius_sq = s->radius * s->radius;
      forEachRow(g, centers, first, last, a, k.sphere_boxes, row, mask);
    } else {
      const auto& b = std::get<Box>(o.shape);
      const SatAxes axes = SatAxes::Of(Mat3::Identity(), half, b.pose.rotation, b.half_extents);
      forEachRow(g, centers, first, last, satArgs(axes, b.pose.translation), k.sat_boxes, row, mask);
    }
  }
}

void occupiedVoxelsWorldFrame(const VoxelGrid& g, const VoxelCenters& world_centers,
                              const Transform& pose, std::span<const Obstacle> obstacles,
                              std::vector<std::uint8_t>& mask) {
  const auto& k = simd::kernels();
  const std::size_t n = g.count();
  mask.assign(n, 0);
  std::vector<std::uint8_t> tmp(n);
  const Vec3 half = Vec3::Constant(0.5 * g.resolution());
  for (const auto& o : obstacles) {
    if (const auto* s = std::get_if<Sphere>(&o.shape)) {
      simd::SphereBoxesArgs a{};
      fillRotation(pose.rotation, a.rot);
      for (int d = 0; d < 3; ++d) {
        a.half[d] = half[d];
        a.sphere[d] = s->center[d];
      }
      a.radius_sq = s->radius * s->radius;
      a.cx = world_centers.x.data();
      a.cy = world_centers.y.data();
      a.cz = world_centers.z.data();
      a.n = n;
      k.sphere_boxes(a, tmp.data());
    } else {
      const auto& b = std::get<Box>(o.shape);
      const SatAxes axes = SatAxes::Of(pose.rotation, half, b.pose.rotation, b.half_extents);
      simd::SatBoxesArgs a = satArgs(axes, b.pose.translation);
      a.cx = world_centers.x.data();
      a.cy = world_centers.y.data();
      a.cz = world_centers.z.data();
      a.n = n;
      k.sat_boxes(a, tmp.data());
    }
    for (std::size_t i = 0; i < n; ++i) mask[i] |= tmp[i];
  }
}

void SampleBitmap::resetAll(std::size_t n, bool value) {
  size_ = n;
  words_.assign((n + 63) / 64, value ? ~std::uint64_t{0} : 0);
  if (value && (n & 63) != 0) words_.back() = (std::uint64_t{1} << (n & 63)) - 1;
}

void SampleBitmap::collect(std::vector<SampleId>& out) const {
  out.clear();
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      const int b = std::countr_zero(bits);
      out.push_back(static_cast<SampleId>(w * 64 + b));
      bits &= bits - 1;
    }
  }
}

std::size_t SampleBitmap::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

void invalidateOccupied(const VoxelLists& occupation, const std::vector<std::uint8_t>& mask,
                        SampleBitmap& valid, std::vector<VoxelId>& touched) {
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (!mask[v]) continue;
    touched.push_back(static_cast<VoxelId>(v));
    for (SampleId n : occupation.list(static_cast<VoxelId>(v))) valid.clear(n);
  }
}

namespace {

template <class F>
void forBlockVoxels(const VoxelGrid& g, const std::array<int, 3>& s, int bx, int by, int bz, F&& f) {
  for (int z = bz * s[2]; z < (bz + 1) * s[2]; ++z)
    for (int y = by * s[1]; y < (by + 1) * s[1]; ++y)
      for (int x = bx * s[0]; x < (bx + 1) * s[0]; ++x) f(g.linear(x, y, z));
}

}  // namespace

BlockUnions BlockUnions::Of(const VoxelGrid& g, const VoxelLists& occupation, std::size_t sample_count,
                            const std::array<int, 3>& shape) {
  BlockUnions u;
  u.shape = shape;
  for (int a = 0; a < 3; ++a) u.dims[a] = g.dims()[a] / shape[a];
  const std::size_t nb = static_cast<std::size_t>(u.dims[0]) * u.dims[1] * u.dims[2];
  u.lists.offsets.assign(1, 0);
  u.lists.offsets.reserve(nb + 1);
  SampleBitmap marks;
  marks.resetAll(sample_count, false);
  std::vector<SampleId> merged;
  for (int bz = 0; bz < u.dims[2]; ++bz)
    for (int by = 0; by < u.dims[1]; ++by)
      for (int bx = 0; bx < u.dims[0]; ++bx) {
        forBlockVoxels(g, shape, bx, by, bz, [&](VoxelId v) {
          for (SampleId n : occupation.list(v)) marks.set(n);
        });
        marks.collect(merged);
        for (SampleId n : merged) marks.clear(n);
        u.lists.entries.insert(u.lists.entries.end(), merged.begin(), merged.end());
        u.lists.offsets.push_back(u.lists.entries.size());
      }
  return u;
}

void invalidateOccupied(const VoxelGrid& g, const VoxelLists& occupation, std::span<const BlockUnions> levels,
                        const std::vector<std::uint8_t>& mask, std::vector<std::uint8_t>& covered,
                        SampleBitmap& valid, std::vector<VoxelId>& touched) {
  covered.assign(mask.size(), 0);
  for (const BlockUnions& u : levels) {
    VoxelId b = 0;
    for (int bz = 0; bz < u.dims[2]; ++bz)
      for (int by = 0; by < u.dims[1]; ++by)
        for (int bx = 0; bx < u.dims[0]; ++bx, ++b) {
          bool full = true, fresh = false;
          forBlockVoxels(g, u.shape, bx, by, bz, [&](VoxelId v) {
            full = full && mask[v];
            fresh = fresh || !covered[v];
          });
          if (!full || !fresh) continue;
          for (SampleId n : u.lists.list(b)) valid.clear(n);
          forBlockVoxels(g, u.shape, bx, by, bz, [&](VoxelId v) { covered[v] = 1; });
        }
  }
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (!mask[v]) continue;
    touched.push_back(static_cast<VoxelId>(v));
    if (covered[v]) continue;
    for (SampleId n : occupation.list(static_cast<VoxelId>(v))) valid.clear(n);
  }
}

}  // namespace idrm
