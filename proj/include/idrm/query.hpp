#pragma once

#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "idrm/idrm_map.hpp"
#include "idrm/ik.hpp"
#include "idrm/robot_model.hpp"
#include "idrm/shapes.hpp"

namespace idrm {

/// Ground-contact band for candidate stances (absolute values).
struct GroundTolerance {
  double z = 0.05;
  double roll = 0.2;
  double pitch = 0.2;
};

struct ScoreWeights {
  double w_m = 1.0;         // manipulability
  VecX joint_weights;       // W (diagonal); empty means identity
  double w_b = 1.0;         // per metre of planar stance offset
};

/// Which frame the collision update's overlap tests run in. kAuto picks the map frame when
/// the grid has more voxels than there are obstacles.
enum class FrameChoice { kAuto, kMapFrame, kWorldFrame };

struct StageTimings {
  double collision_us = 0.0;
  double feasibility_us = 0.0;
  double selection_us = 0.0;
  double ik_us = 0.0;
  double total_us() const { return collision_us + feasibility_us + selection_us + ik_us; }
};

/// Per-query working memory. The map itself is never modified.
struct QueryScratch {
  SampleBitmap valid;
  std::vector<VoxelId> touched;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> covered;
  std::vector<SampleId> free;
  std::vector<SampleId> feasible;
  VoxelCenters world_centers;
  std::vector<Obstacle> local_obstacles;
  bool used_map_frame = true;
  StageTimings timings;
};

/// Collision update: fills scratch.valid and scratch.free (ascending) and returns the
/// latter. The ground plane is not an obstacle here.
const std::vector<SampleId>& collisionUpdate(const IdrmMap& map, const Transform& y, const Environment& env,
                                             QueryScratch& s, FrameChoice frame = FrameChoice::kAuto);

/// The same over any grid with occupation lists: `y` places the grid in the
/// world and `sample_count` sizes the validity bitmap.
const std::vector<SampleId>& collisionUpdate(const VoxelGrid& g, const VoxelCenters& centers,
                                             const VoxelLists& occupation, std::size_t sample_count,
                                             const Transform& y, const Environment& env, QueryScratch& s,
                                             FrameChoice frame = FrameChoice::kAuto,
                                             std::span<const BlockUnions> blocks = {});

/// Voxels whose box, placed in the world by y, intersects the slab |z| <= eps_z.
std::vector<VoxelId> groundVoxels(const VoxelGrid& g, const Transform& y, double eps_z);

/// Candidate stance of a sample for effector target y: y * t_stance_eff.
inline Transform candidateStance(const SampleRecord& s, const Transform& y) {
  return compose(y, s.t_feet_eff());
}

bool withinGroundTolerance(const Transform& stance, const GroundTolerance& tol);

/// Feasibility update over the samples still valid in `s` (after collisionUpdate).
/// Fills and returns scratch.feasible (ascending).
const std::vector<SampleId>& feasibilityUpdate(const IdrmMap& map, const Transform& y,
                                               const GroundTolerance& tol, QueryScratch& s);

/// Same, from an explicit Q_free list.
std::vector<SampleId> feasibilityUpdate(const IdrmMap& map, std::span<const SampleId> q_free,
                                        const Transform& y, const GroundTolerance& tol);

struct RankedCandidate {
  SampleId index = 0;
  double score = 0.0;
};

/// Score of sample n: w_m g - (|joints_n - joints_0|_W + w_b |xy(stance_n) - xy(stance_0)|).
double candidateScore(const SampleRecord& s, const Transform& y, const VecX& joints0,
                      const Eigen::Vector2d& stance0_xy, const ScoreWeights& w);

/// Descending score, ties by ascending index. Throws Error on empty input.
std::vector<RankedCandidate> selectCandidates(const IdrmMap& map, std::span<const SampleId> feasible,
                                              const Transform& y, const RobotModel& m,
                                              const Configuration& q0, const ScoreWeights& w);

/// World configuration of a sample for target y: stance at y * t_stance_eff
/// dropped onto z = 0 and levelled, heading kept.
Configuration placeSample(const SampleRecord& s, const Transform& y);

enum class Outcome { kSuccess, kNoFeasibleSample, kAllCandidatesFailed, kBudgetExhausted };
const char* outcomeName(Outcome o);

struct CandidateTrace {
  SampleId index = 0;
  double score = 0.0;
  bool placed_collision_free = true;  // only checked by IRM
  bool ik_converged = false;
  bool collision_free = false;
  bool balanced = false;
};

struct EndPoseResult {
  Outcome outcome = Outcome::kAllCandidatesFailed;
  Configuration q;
  Transform stance_goal;
  std::optional<SampleId> index;
  double score = 0.0;
  int candidates_tried = 0;
  std::size_t free_count = 0;
  std::size_t feasible_count = 0;
  StageTimings timings;
  double total_s = 0.0;  // wall time of the whole call
  std::vector<CandidateTrace> trace;
  bool success() const { return outcome == Outcome::kSuccess; }
};

nlohmann::json resultToJson(const EndPoseResult& r);

struct PlanOptions {
  GroundTolerance tol;
  ScoreWeights weights;
  int max_candidates = 50;
  IkOptions ik;
  FrameChoice frame = FrameChoice::kAuto;
};

/// Final adjustment: IK from `placed` to y with the stance locked to the
/// ground, balance and self-collision required, then an exact sphere check
/// against the environment.
std::optional<Configuration> finalizeEndPose(const RobotModel& m, const Configuration& placed,
                                             const Transform& y, const Environment& env,
                                             const IkOptions& ik, CandidateTrace& trace);

/// Independent post-hoc check of an end-pose: collision-free, balanced,
/// stance on the ground, effector within the given tolerances of y.
bool verifyEndPose(const RobotModel& m, const Configuration& q, const Transform& y, const Environment& env,
                   double position_tol, double orientation_tol, double stance_tol = 1e-6);

/// Binds a map to a robot; the robot digest must match the map's.
class EndPosePlanner {
 public:
  EndPosePlanner(const IdrmMap& map, const RobotModel& m);
  EndPoseResult plan(const Configuration& q0, const Transform& y, const Environment& env,
                     const PlanOptions& opt = {});
  const IdrmMap& map() const { return map_; }
  const RobotModel& model() const { return m_; }

 private:
  const IdrmMap& map_;
  const RobotModel& m_;
  QueryScratch scratch_;
};

EndPoseResult planEndPose(const IdrmMap& map, const RobotModel& m, const Configuration& q0, const Transform& y,
                          const Environment& env, const PlanOptions& opt = {});

}  // namespace idrm
