#include "idrm/query.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "idrm/error.hpp"
#include "idrm/robot_io.hpp"

namespace idrm {

namespace {

using Clock = std::chrono::steady_clock;

double microsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

nlohmann::json transformJson(const Transform& t) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  const Vec3& p = t.translation;
  nlohmann::json j = {{"xyz", {p.x(), p.y(), p.z()}}, {"rotation", rot}};
  if (auto rpy = tryRpyOf(t.rotation)) j["rpy"] = {rpy->roll, rpy->pitch, rpy->yaw};
  return j;
}

}  // namespace

const std::vector<SampleId>& collisionUpdate(const IdrmMap& map, const Transform& y, const Environment& env,
                                             QueryScratch& s, FrameChoice frame) {
  return collisionUpdate(map.grid(), map.centers(), map.occupation(), map.size(), y, env, s, frame, map.blocks());
}

const std::vector<SampleId>& collisionUpdate(const VoxelGrid& g, const VoxelCenters& centers,
                                             const VoxelLists& occupation, std::size_t sample_count,
                                             const Transform& y, const Environment& env, QueryScratch& s,
                                             FrameChoice frame, std::span<const BlockUnions> blocks) {
  s.valid.resetAll(sample_count, true);
  s.touched.clear();
  const std::size_t k = g.count();
  const std::size_t l = env.obstacles.size();
  s.used_map_frame = frame == FrameChoice::kMapFrame || (frame == FrameChoice::kAuto && k > l);
  if (l == 0) {
    s.mask.assign(k, 0);
  } else if (s.used_map_frame) {
    const Transform to_map = invert(y);
    s.local_obstacles.clear();
    for (const auto& o : env.obstacles) s.local_obstacles.push_back(o.transformed(to_map));
    occupiedVoxelsGridFrame(g, centers, s.local_obstacles, s.mask);
  } else {
    s.world_centers = VoxelCenters::Transformed(centers, y);
    occupiedVoxelsWorldFrame(g, s.world_centers, y, env.obstacles, s.mask);
  }
  if (blocks.empty()) invalidateOccupied(occupation, s.mask, s.valid, s.touched);
  else invalidateOccupied(g, occupation, blocks, s.mask, s.covered, s.valid, s.touched);
  s.valid.collect(s.free);
  return s.free;
}

std::vector<VoxelId> groundVoxels(const VoxelGrid& g, const Transform& y, double eps_z) {
  std::vector<VoxelId> out;
  const Mat3& r = y.rotation;
  const double reach = 0.5 * g.resolution() * (std::abs(r(2, 0)) + std::abs(r(2, 1)) + std::abs(r(2, 2)));
  const double limit = eps_z + reach;
  for (std::size_t v = 0; v < g.count(); ++v) {
    const Vec3 c = g.center(static_cast<VoxelId>(v));
    const double z = r.row(2).dot(c) + y.translation.z();
    if (std::abs(z) <= limit) out.push_back(static_cast<VoxelId>(v));
  }
  return out;
}

bool withinGroundTolerance(const Transform& stance, const GroundTolerance& tol) {
  if (!(std::abs(stance.translation.z()) < tol.z)) return false;
  double roll = 0.0, pitch = 0.0;
  rollPitchOf(stance.rotation, roll, pitch);
  return std::abs(roll) < tol.roll && std::abs(pitch) < tol.pitch;
}

namespace {

void scanGround(const IdrmMap& map, const Transform& y, const GroundTolerance& tol, const SampleBitmap& valid,
                std::vector<SampleId>& out) {
  out.clear();
  for (VoxelId v : groundVoxels(map.grid(), y, tol.z)) {
    for (SampleId n : map.reach().list(v)) {
      if (!valid.test(n)) continue;
      if (withinGroundTolerance(candidateStance(map.sample(n), y), tol)) out.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

const std::vector<SampleId>& feasibilityUpdate(const IdrmMap& map, const Transform& y,
                                               const GroundTolerance& tol, QueryScratch& s) {
  scanGround(map, y, tol, s.valid, s.feasible);
  return s.feasible;
}

std::vector<SampleId> feasibilityUpdate(const IdrmMap& map, std::span<const SampleId> q_free,
                                        const Transform& y, const GroundTolerance& tol) {
  SampleBitmap valid;
  valid.resetAll(map.size(), false);
  for (SampleId n : q_free) valid.set(n);
  std::vector<SampleId> out;
  scanGround(map, y, tol, valid, out);
  return out;
}

double candidateScore(const SampleRecord& s, const Transform& y, const VecX& joints0,
                      const Eigen::Vector2d& stance0_xy, const ScoreWeights& w) {
  const VecX d = s.q.joints - joints0;
  double jd = 0.0;
  if (w.joint_weights.size() == 0) {
    jd = d.norm();
  } else {
    if (w.joint_weights.size() != d.size()) throw DimensionError("joint weight count does not match the robot");
    jd = std::sqrt((w.joint_weights.array() * d.array().square()).sum());
  }
  const Vec3 p = candidateStance(s, y).translation;
  const double bd = (Eigen::Vector2d(p.x(), p.y()) - stance0_xy).norm();
  return w.w_m * s.g - (jd + w.w_b * bd);
}

std::vector<RankedCandidate> selectCandidates(const IdrmMap& map, std::span<const SampleId> feasible,
                                              const Transform& y, const RobotModel& m,
                                              const Configuration& q0, const ScoreWeights& w) {
  if (feasible.empty()) throw Error("candidate selection needs at least one feasible sample");
  const Frames f0 = forwardKinematics(m, q0);
  const Eigen::Vector2d s0 = f0.stance.translation.head<2>();
  std::vector<RankedCandidate> out;
  out.reserve(feasible.size());
  for (SampleId n : feasible) out.push_back({n, candidateScore(map.sample(n), y, q0.joints, s0, w)});
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  return out;
}

Configuration placeSample(const SampleRecord& s, const Transform& y) {
  const Transform t = candidateStance(s, y);
  const double yaw = std::atan2(t.rotation(1, 0), t.rotation(0, 0));
  const Transform stance{rotZ(yaw), Vec3(t.translation.x(), t.translation.y(), 0.0)};
  return {compose(stance, s.q.base), s.q.joints};
}

const char* outcomeName(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kNoFeasibleSample: return "no-feasible-sample";
    case Outcome::kAllCandidatesFailed: return "all-candidates-failed";
    case Outcome::kBudgetExhausted: return "budget-exhausted";
  }
  return "unknown";
}

nlohmann::json resultToJson(const EndPoseResult& r) {
  nlohmann::json j;
  j["outcome"] = outcomeName(r.outcome);
  j["success"] = r.success();
  j["index"] = r.index ? nlohmann::json(*r.index) : nlohmann::json(nullptr);
  j["score"] = r.score;
  j["candidates_tried"] = r.candidates_tried;
  j["free_count"] = r.free_count;
  j["feasible_count"] = r.feasible_count;
  j["timings_us"] = {{"collision", r.timings.collision_us},
                     {"feasibility", r.timings.feasibility_us},
                     {"selection", r.timings.selection_us},
                     {"ik", r.timings.ik_us}};
  j["endpose_time_s"] = r.total_s;
  if (r.success()) {
    nlohmann::json joints = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.q.joints.size(); ++i) joints.push_back(r.q.joints[i]);
    j["q"] = {{"base", transformJson(r.q.base)}, {"joints", joints}};
    j["stance_goal"] = transformJson(r.stance_goal);
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& c : r.trace)
    trace.push_back({{"index", c.index},
                     {"score", c.score},
                     {"placed_collision_free", c.placed_collision_free},
                     {"ik_converged", c.ik_converged},
                     {"collision_free", c.collision_free},
                     {"balanced", c.balanced}});
  j["trace"] = trace;
  return j;
}

std::optional<Configuration> finalizeEndPose(const RobotModel& m, const Configuration& placed,
                                             const Transform& y, const Environment& env,
                                             const IkOptions& ik, CandidateTrace& trace) {
  ConstraintSet c;
  c.target = y;
  c.stance_lock = true;
  c.balance = true;
  c.self_collision = true;
  const IkResult r = solveIk(m, placed, placed, c, defaultIkWeights(m), ik);
  trace.ik_converged = r.converged;
  if (!r.converged) return std::nullopt;
  const Frames f = forwardKinematics(m, r.q);
  trace.collision_free = !collidesWithEnvironment(collisionSpheres(m, f), env);
  trace.balanced = balanced(m, f);
  if (!trace.collision_free || !trace.balanced) return std::nullopt;
  return r.q;
}

bool verifyEndPose(const RobotModel& m, const Configuration& q, const Transform& y, const Environment& env,
                   double position_tol, double orientation_tol, double stance_tol) {
  const Frames f = forwardKinematics(m, q);
  if ((f.effector.translation - y.translation).norm() >= position_tol) return false;
  if (rotationDistance(f.effector.rotation, y.rotation) >= orientation_tol) return false;
  double roll = 0.0, pitch = 0.0;
  rollPitchOf(f.stance.rotation, roll, pitch);
  if (std::abs(f.stance.translation.z()) > stance_tol || std::abs(roll) > stance_tol ||
      std::abs(pitch) > stance_tol)
    return false;
  if (!balanced(m, f)) return false;
  if (!selfCollisionFree(m, collisionSpheres(m, f))) return false;
  if (!m.withinLimits(q.joints)) return false;
  return !collidesWithEnvironment(collisionSpheres(m, f), env);
}

EndPosePlanner::EndPosePlanner(const IdrmMap& map, const RobotModel& m) : map_(map), m_(m) {
  if (map.meta().robot_digest != robotDigest(m))
    throw MapFileError(MapFileError::Code::kDigestMismatch, "map was built for a different robot description");
}

EndPoseResult EndPosePlanner::plan(const Configuration& q0, const Transform& y, const Environment& env,
                                   const PlanOptions& opt) {
  const auto start = Clock::now();
  EndPoseResult res;
  QueryScratch& s = scratch_;
  s.timings = {};

  auto t = Clock::now();
  collisionUpdate(map_, y, env, s, opt.frame);
  s.timings.collision_us = microsSince(t);
  res.free_count = s.free.size();

  t = Clock::now();
  feasibilityUpdate(map_, y, opt.tol, s);
  s.timings.feasibility_us = microsSince(t);
  res.feasible_count = s.feasible.size();

  if (s.feasible.empty()) {
    res.outcome = Outcome::kNoFeasibleSample;
    res.timings = s.timings;
    res.total_s = microsSince(start) * 1e-6;
    return res;
  }

  t = Clock::now();
  const auto ranked = selectCandidates(map_, s.feasible, y, m_, q0, opt.weights);
  s.timings.selection_us = microsSince(t);

  t = Clock::now();
  res.outcome = Outcome::kAllCandidatesFailed;
  const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(std::max(opt.max_candidates, 0)));
  for (std::size_t i = 0; i < limit; ++i) {
    const RankedCandidate& c = ranked[i];
    CandidateTrace tr;
    tr.index = c.index;
    tr.score = c.score;
    ++res.candidates_tried;
    const SampleRecord& sample = map_.sample(c.index);
    auto q = finalizeEndPose(m_, placeSample(sample, y), y, env, opt.ik, tr);
    res.trace.push_back(tr);
    if (q) {
      res.outcome = Outcome::kSuccess;
      res.q = std::move(*q);
      res.index = c.index;
      res.score = c.score;
      res.stance_goal = compose(y, sample.t_stance_eff);
      break;
    }
  }
  s.timings.ik_us = microsSince(t);
  res.timings = s.timings;
  res.total_s = microsSince(start) * 1e-6;
  return res;
}

EndPoseResult planEndPose(const IdrmMap& map, const RobotModel& m, const Configuration& q0, const Transform& y,
                          const Environment& env, const PlanOptions& opt) {
  EndPosePlanner p(map, m);
  return p.plan(q0, y, env, opt);
}

}  // namespace idrm
