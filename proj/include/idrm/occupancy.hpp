#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "idrm/robot_model.hpp"
#include "idrm/shapes.hpp"
#include "idrm/voxel_grid.hpp"

namespace idrm {

using SampleId = std::uint32_t;

/// Per-voxel sorted lists of sample ids in compressed-row form.
struct VoxelLists {
  std::vector<std::uint64_t> offsets;  // voxel count + 1
  std::vector<SampleId> entries;

  std::span<const SampleId> list(VoxelId v) const {
    return {entries.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  std::size_t voxelCount() const { return offsets.empty() ? 0 : offsets.size() - 1; }

  /// Transpose per-sample voxel sets (each sorted, unique) into per-voxel
  /// lists. Lists come out sorted because samples are visited in order.
  static VoxelLists FromSampleVoxels(std::size_t voxel_count,
                                     const std::vector<std::vector<VoxelId>>& per_sample);

  bool operator==(const VoxelLists&) const = default;
};

/// Appends (sorted, unique) every voxel whose box intersects at least one of
/// the spheres. Sphere centres are in grid coordinates.
void voxelizeSpheres(const VoxelGrid& g, const VoxelCenters& centers,
                     std::span<const WorldSphere> spheres, std::vector<VoxelId>& out);

/// mask[i] = 1 for every voxel overlapped by an obstacle given in grid
/// coordinates. Only the voxels inside each obstacle's bounding box are tested.
void occupiedVoxelsGridFrame(const VoxelGrid& g, const VoxelCenters& centers,
                             std::span<const Obstacle> obstacles, std::vector<std::uint8_t>& mask);

/// Same result computed in the world frame: voxel boxes are placed by `pose`
/// (world_centers = pose applied to every centre) and tested as oriented boxes
/// against world-frame obstacles. Scans every voxel.
void occupiedVoxelsWorldFrame(const VoxelGrid& g, const VoxelCenters& world_centers,
                              const Transform& pose, std::span<const Obstacle> obstacles,
                              std::vector<std::uint8_t>& mask);

/// Bitmap over sample ids.
class SampleBitmap {
 public:
  void resetAll(std::size_t n, bool value);
  bool test(SampleId i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void clear(SampleId i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void set(SampleId i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  std::size_t size() const { return size_; }
  /// Ascending ids of set bits.
  void collect(std::vector<SampleId>& out) const;
  std::size_t count() const;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

/// Clears every sample listed under a masked voxel. Appends the masked voxel
/// ids to `touched`.
void invalidateOccupied(const VoxelLists& occupation, const std::vector<std::uint8_t>& mask,
                        SampleBitmap& valid, std::vector<VoxelId>& touched);

/// Occupation lists merged over aligned blocks of `shape` voxels. Derived in
/// memory, never stored. Edge voxels that do not fill a whole block belong to
/// no block.
struct BlockUnions {
  std::array<int, 3> shape{1, 1, 1};
  std::array<int, 3> dims{0, 0, 0};  // blocks per axis
  VoxelLists lists;                  // one sorted list per block, x-fastest

  static BlockUnions Of(const VoxelGrid& g, const VoxelLists& occupation, std::size_t sample_count,
                        const std::array<int, 3>& shape);
};

/// Same result as the flat overload. A block whose voxels are all masked is
/// cleared through its union list (each sample once instead of once per
/// voxel it touches); `levels` go coarse to fine. `covered` is scratch.
void invalidateOccupied(const VoxelGrid& g, const VoxelLists& occupation, std::span<const BlockUnions> levels,
                        const std::vector<std::uint8_t>& mask, std::vector<std::uint8_t>& covered,
                        SampleBitmap& valid, std::vector<VoxelId>& touched);

}  // namespace idrm
