#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idrm/ik.hpp"
#include "idrm/occupancy.hpp"
#include "idrm/robot_model.hpp"
#include "idrm/voxel_grid.hpp"

namespace idrm {

/// One stored posture. `q` is stance-local: the stance frame of q is the
/// world origin.
struct SampleRecord {
  Configuration q;
  Transform t_stance_eff;  // stance frame seen from the effector frame
  double g = 0.0;          // manipulability
  SampleId index = 0;

  /// The stance frame doubles as the feet frame.
  const Transform& t_feet_eff() const { return t_stance_eff; }
  bool operator==(const SampleRecord&) const = default;
};

/// K rotations from a Halton sequence mapped through Shoemake's uniform
/// quaternion construction, rotated as a set so element 0 is the identity
/// (effector pointing straight down for the demo robot).
std::vector<Mat3> orientationSet(int k);

struct SamplingParams {
  std::size_t count = 100000;
  Vec3 region_lo{0.3, -0.5, 0.2};  // stance frame
  Vec3 region_hi{1.0, 0.5, 1.4};
  int orientations = 32;
  std::uint64_t seed = 1;
  double seed_noise = 0.3;  // rad, uniform around q_nom
  std::size_t max_consecutive_rejections = 10000;
  /// When set, postures whose stance point falls outside this effector-frame
  /// grid are rejected as part of sampling.
  std::optional<VoxelGrid> containment;
  IkOptions ik;
};

struct SamplingStats {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  std::size_t ik_failures = 0;
  std::size_t outside_grid = 0;
  double acceptanceRate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts);
  }
};

/// Deterministic in (model, params). A run with a smaller count returns a
/// prefix of a run with a larger one. Throws SamplingError after
/// `max_consecutive_rejections` failures in a row.
std::vector<SampleRecord> samplePostures(const RobotModel& m, const SamplingParams& p,
                                         SamplingStats* stats = nullptr);

struct MapMetadata {
  std::uint64_t robot_digest = 0;
  std::uint64_t seed = 0;
  std::uint32_t orientations = 0;
  double extent = 0.0;
  bool operator==(const MapMetadata&) const = default;
};

class IdrmMap {
 public:
  IdrmMap() = default;
  IdrmMap(VoxelGrid grid, std::vector<SampleRecord> samples, VoxelLists reach, VoxelLists occupation,
          MapMetadata meta);

  const VoxelGrid& grid() const { return grid_; }
  const std::vector<SampleRecord>& samples() const { return samples_; }
  const SampleRecord& sample(SampleId n) const { return samples_[n]; }
  std::size_t size() const { return samples_.size(); }
  const VoxelLists& reach() const { return reach_; }
  const VoxelLists& occupation() const { return occupation_; }
  const MapMetadata& meta() const { return meta_; }
  /// Voxel centres in the map frame (derived, not stored).
  const VoxelCenters& centers() const { return centers_; }
  /// Occupation unions over 4- and 2-voxel blocks (derived, not stored).
  const std::vector<BlockUnions>& blocks() const { return blocks_; }

  bool operator==(const IdrmMap& o) const {
    return grid_ == o.grid_ && samples_ == o.samples_ && reach_ == o.reach_ &&
           occupation_ == o.occupation_ && meta_ == o.meta_;
  }

 private:
  VoxelGrid grid_;
  std::vector<SampleRecord> samples_;
  VoxelLists reach_;
  VoxelLists occupation_;
  MapMetadata meta_;
  VoxelCenters centers_;
  std::vector<BlockUnions> blocks_;
};

/// Effector-frame collision spheres of a stance-local sample.
std::vector<WorldSphere> effectorFrameSpheres(const RobotModel& m, const SampleRecord& s);

/// Voxels covered by the sample's spheres in the map frame, sorted.
std::vector<VoxelId> sampleVoxels(const RobotModel& m, const VoxelGrid& g, const VoxelCenters& c,
                                  const SampleRecord& s);

/// Throws BuildError on an empty sample list or when a stance point lies
/// outside the grid (the message lists the offenders).
IdrmMap buildIdrm(const RobotModel& m, std::vector<SampleRecord> samples, const VoxelGrid& grid,
                  MapMetadata meta = {});

/// Samples then builds on a grid of side `extent` centred on the effector.
IdrmMap buildIdrm(const RobotModel& m, const SamplingParams& p, double resolution, double extent,
                  SamplingStats* stats = nullptr);

struct MemoryBreakdown {
  std::size_t header = 0;
  std::size_t configurations = 0;  // base poses and joint vectors
  std::size_t sample_metadata = 0; // stance transforms and manipulability
  std::size_t reach_lists = 0;
  std::size_t occupation_lists = 0;
  std::size_t total() const {
    return header + configurations + sample_metadata + reach_lists + occupation_lists;
  }
};

/// Writes the binary map file (layout described in the README).
void saveMap(const IdrmMap& map, const std::string& path, MemoryBreakdown* sizes = nullptr);

/// Throws MapFileError with a code per failure mode. When `model` is given
/// the stored robot digest must match it.
IdrmMap loadMap(const std::string& path, const RobotModel* model = nullptr,
                MemoryBreakdown* sizes = nullptr);

/// In-memory serialisation used by saveMap/loadMap.
std::vector<std::uint8_t> encodeMap(const IdrmMap& map, MemoryBreakdown* sizes = nullptr);
IdrmMap decodeMap(const std::vector<std::uint8_t>& bytes, const RobotModel* model = nullptr,
                  MemoryBreakdown* sizes = nullptr);

}  // namespace idrm
