#include "idrm/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "idrm/error.hpp"
#include "idrm/robot_io.hpp"

namespace idrm {

namespace {

using Clock = std::chrono::steady_clock;

double microsSince(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

void checkBudget(const BaselineBudget& b) {
  if (b.max_iterations < 1) throw Error("baseline budget needs at least one iteration");
}

Mat3 uniformRotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
  return Eigen::Quaterniond(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3))
      .normalized()
      .toRotationMatrix();
}

}  // namespace

Transform randomStance(const Transform& y, const BaselineBudget& b, std::mt19937_64& rng) {
  if (b.fixed_stance) return *b.fixed_stance;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ri2 = b.inner_radius * b.inner_radius, ro2 = b.outer_radius * b.outer_radius;
  const double r = std::sqrt(ri2 + (ro2 - ri2) * u(rng));
  const double theta = 2.0 * std::numbers::pi * u(rng);
  const double yaw = 2.0 * std::numbers::pi * u(rng) - std::numbers::pi;
  return {rotZ(yaw), Vec3(y.translation.x() + r * std::cos(theta), y.translation.y() + r * std::sin(theta), 0.0)};
}

EndPoseResult rpPlan(const RobotModel& m, const Configuration& q0, const Transform& y, const Environment& env,
                     const BaselineBudget& budget) {
  checkBudget(budget);
  (void)q0;
  const auto start = Clock::now();
  std::mt19937_64 rng(budget.seed);
  EndPoseResult res;
  res.outcome = Outcome::kBudgetExhausted;
  const VecX lo = m.lowerLimits(), hi = m.upperLimits();
  const VecX weights = defaultIkWeights(m);
  ConstraintSet c;
  c.target = y;
  c.fixed_base = true;
  c.balance = true;
  c.self_collision = true;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int it = 0; it < budget.max_iterations; ++it) {
    ++res.candidates_tried;
    const Transform stance = randomStance(y, budget, rng);
    Configuration seed{m.baseForStance(stance), VecX(m.dof())};
    for (int j = 0; j < m.dof(); ++j) seed.joints[j] = lo[j] + (hi[j] - lo[j]) * u(rng);
    const Configuration nominal = m.nominalConfiguration(stance);

    auto t = Clock::now();
    const IkResult r = solveIk(m, seed, nominal, c, weights, budget.ik);
    res.timings.ik_us += microsSince(t);
    CandidateTrace tr;
    tr.ik_converged = r.converged;
    if (r.converged) {
      t = Clock::now();
      const Frames f = forwardKinematics(m, r.q);
      tr.collision_free = !collidesWithEnvironment(collisionSpheres(m, f), env);
      tr.balanced = balanced(m, f);
      res.timings.collision_us += microsSince(t);
    }
    res.trace.push_back(tr);
    if (tr.ik_converged && tr.collision_free && tr.balanced) {
      res.outcome = Outcome::kSuccess;
      res.q = r.q;
      res.stance_goal = stance;
      break;
    }
  }
  res.total_s = microsSince(start) * 1e-6;
  return res;
}

VoxelGrid FixedBaseDrm::DefaultGrid() { return VoxelGrid(Vec3(-0.6, -1.0, -0.1), 0.1, {20, 20, 20}); }

double orientationDispersion(int k, int probes, std::uint64_t seed) {
  const auto set = orientationSet(k);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Mat3 r = uniformRotation(rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : set) best = std::min(best, rotationDistance(r, s));
    worst = std::max(worst, best);
  }
  return worst;
}

FixedBaseDrm FixedBaseDrm::Build(const RobotModel& m, const IdrmMap& map, const VoxelGrid& grid) {
  FixedBaseDrm d;
  d.grid_ = grid;
  d.centers_ = VoxelCenters::Of(grid);
  const std::size_t n = map.size();
  std::vector<std::vector<VoxelId>> reach(n), occ(n);
  d.effector_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SampleRecord& s = map.sample(static_cast<SampleId>(i));
    d.effector_[i] = invert(s.t_stance_eff);
    if (auto v = grid.index(d.effector_[i].translation)) reach[i].push_back(*v);
    voxelizeSpheres(grid, d.centers_, collisionSpheres(m, s.q), occ[i]);
  }
  d.reach_ = VoxelLists::FromSampleVoxels(grid.count(), reach);
  d.occupation_ = VoxelLists::FromSampleVoxels(grid.count(), occ);
  d.dispersion_ = orientationDispersion(static_cast<int>(std::max<std::uint32_t>(map.meta().orientations, 1)));
  return d;
}

EndPoseResult rdrmPlan(const RobotModel& m, const IdrmMap& map, const FixedBaseDrm& drm, const Configuration& q0,
                       const Transform& y, const Environment& env, const BaselineBudget& budget,
                       const RdrmOptions& opt) {
  checkBudget(budget);
  (void)q0;
  const auto start = Clock::now();
  std::mt19937_64 rng(budget.seed);
  EndPoseResult res;
  res.outcome = Outcome::kBudgetExhausted;
  QueryScratch s;
  std::vector<SampleId> cand;

  for (int it = 0; it < budget.max_iterations; ++it) {
    const Transform stance = randomStance(y, budget, rng);
    const Transform y_local = compose(invert(stance), y);
    const auto voxel = drm.grid().index(y_local.translation);
    if (!voxel) continue;

    auto t = Clock::now();
    collisionUpdate(drm.grid(), drm.centers(), drm.occupation(), drm.size(), stance, env, s);
    res.timings.collision_us += microsSince(t);
    res.free_count = s.free.size();

    t = Clock::now();
    cand.clear();
    for (SampleId n : drm.reach().list(*voxel)) {
      if (!s.valid.test(n)) continue;
      if (rotationDistance(drm.effector(n).rotation, y_local.rotation) <= drm.dispersion()) cand.push_back(n);
    }
    std::sort(cand.begin(), cand.end(), [&](SampleId a, SampleId b) {
      const double ga = map.sample(a).g, gb = map.sample(b).g;
      return ga != gb ? ga > gb : a < b;
    });
    res.timings.selection_us += microsSince(t);
    res.feasible_count = cand.size();

    t = Clock::now();
    const std::size_t tries = std::min(cand.size(), static_cast<std::size_t>(std::max(opt.candidates_per_placement, 0)));
    for (std::size_t i = 0; i < tries; ++i) {
      const SampleRecord& sample = map.sample(cand[i]);
      CandidateTrace tr;
      tr.index = cand[i];
      tr.score = sample.g;
      ++res.candidates_tried;
      const Configuration placed{compose(stance, sample.q.base), sample.q.joints};
      auto q = finalizeEndPose(m, placed, y, env, budget.ik, tr);
      res.trace.push_back(tr);
      if (q) {
        res.outcome = Outcome::kSuccess;
        res.q = std::move(*q);
        res.index = cand[i];
        res.score = sample.g;
        res.stance_goal = forwardKinematics(m, res.q).stance;
        break;
      }
    }
    res.timings.ik_us += microsSince(t);
    if (res.success()) break;
  }
  res.total_s = microsSince(start) * 1e-6;
  return res;
}

EndPoseResult irmPlan(const IdrmMap& map, const RobotModel& m, const Configuration& q0, const Transform& y,
                      const Environment& env, const PlanOptions& opt, const BaselineBudget& budget) {
  checkBudget(budget);
  if (map.meta().robot_digest != robotDigest(m))
    throw MapFileError(MapFileError::Code::kDigestMismatch, "map was built for a different robot description");
  const auto start = Clock::now();
  EndPoseResult res;
  QueryScratch s;

  auto t = Clock::now();
  s.valid.resetAll(map.size(), true);
  feasibilityUpdate(map, y, opt.tol, s);
  res.timings.feasibility_us = microsSince(t);
  res.free_count = map.size();
  res.feasible_count = s.feasible.size();
  if (s.feasible.empty()) {
    res.outcome = Outcome::kNoFeasibleSample;
    res.total_s = microsSince(start) * 1e-6;
    return res;
  }

  t = Clock::now();
  const auto ranked = selectCandidates(map, s.feasible, y, m, q0, opt.weights);
  res.timings.selection_us = microsSince(t);

  const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(budget.max_iterations));
  res.outcome = limit < ranked.size() ? Outcome::kBudgetExhausted : Outcome::kAllCandidatesFailed;
  for (std::size_t i = 0; i < limit; ++i) {
    const RankedCandidate& c = ranked[i];
    const SampleRecord& sample = map.sample(c.index);
    CandidateTrace tr;
    tr.index = c.index;
    tr.score = c.score;
    ++res.candidates_tried;
    const Configuration placed = placeSample(sample, y);

    t = Clock::now();
    tr.placed_collision_free = !collidesWithEnvironment(collisionSpheres(m, placed), env);
    res.timings.collision_us += microsSince(t);
    if (!tr.placed_collision_free) {
      res.trace.push_back(tr);
      continue;
    }

    t = Clock::now();
    auto q = finalizeEndPose(m, placed, y, env, opt.ik, tr);
    res.timings.ik_us += microsSince(t);
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
  res.total_s = microsSince(start) * 1e-6;
  return res;
}

}  // namespace idrm
