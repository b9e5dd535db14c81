#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "idrm/idrm_map.hpp"
#include "idrm/query.hpp"

namespace idrm {

struct BaselineBudget {
  int max_iterations = 1000;  // placements (RP, R-DRM) or candidates (IRM)
  std::uint64_t seed = 1;
  IkOptions ik;
  /// Random stances are drawn in this annulus around the target's ground
  /// projection, with uniform heading.
  double inner_radius = 0.3;
  double outer_radius = 1.1;
  /// Pins every placement to this stance (testing aid).
  std::optional<Transform> fixed_stance;
};

/// Random stance around the target (or budget.fixed_stance).
Transform randomStance(const Transform& y, const BaselineBudget& b, std::mt19937_64& rng);

/// Random placement: random stance, random joints, fixed-stance IK, then
/// balance and exact collision checks.
EndPoseResult rpPlan(const RobotModel& m, const Configuration& q0, const Transform& y, const Environment& env,
                     const BaselineBudget& budget);

/// Forward (stance-frame) map over the same samples: reach lists keyed by the
/// effector position voxel, occupation lists by body voxels.
class FixedBaseDrm {
 public:
  static VoxelGrid DefaultGrid();
  static FixedBaseDrm Build(const RobotModel& m, const IdrmMap& map, const VoxelGrid& grid = DefaultGrid());

  const VoxelGrid& grid() const { return grid_; }
  const VoxelCenters& centers() const { return centers_; }
  const VoxelLists& reach() const { return reach_; }
  const VoxelLists& occupation() const { return occupation_; }
  /// Effector pose of sample n in its stance frame.
  const Transform& effector(SampleId n) const { return effector_[n]; }
  std::size_t size() const { return effector_.size(); }
  /// Largest distance from a rotation to its nearest orientation-set member,
  /// estimated by deterministic probing.
  double dispersion() const { return dispersion_; }

 private:
  VoxelGrid grid_;
  VoxelCenters centers_;
  VoxelLists reach_;
  VoxelLists occupation_;
  std::vector<Transform> effector_;
  double dispersion_ = 0.0;
};

double orientationDispersion(int k, int probes = 4096, std::uint64_t seed = 12345);

struct RdrmOptions {
  /// Final IK attempts per placement, best manipulability first.
  int candidates_per_placement = 5;
};

EndPoseResult rdrmPlan(const RobotModel& m, const IdrmMap& map, const FixedBaseDrm& drm, const Configuration& q0,
                       const Transform& y, const Environment& env, const BaselineBudget& budget,
                       const RdrmOptions& opt = {});

/// IRM: the feasibility filter over every sample, the same ranking as iDRM, then per
/// candidate an exact collision check of the placed sample before the final
/// IK. Candidates are capped by budget.max_iterations.
EndPoseResult irmPlan(const IdrmMap& map, const RobotModel& m, const Configuration& q0, const Transform& y,
                      const Environment& env, const PlanOptions& opt, const BaselineBudget& budget);

}  // namespace idrm
