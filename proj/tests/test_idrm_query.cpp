#include "doctest.h"

#include "idrm/error.hpp"
#include "support.hpp"

using namespace idrm;

namespace {

const RobotModel& robot() {
  static const RobotModel m = demoRobot();
  return m;
}

const IdrmMap& map300() { return idrm::test::smallMap(300); }

const std::vector<std::vector<VoxelId>>& sampleVoxels300() {
  static const auto v = idrm::test::bruteSampleVoxels(robot(), map300());
  return v;
}

// Effector pose of sample n when its stance sits at (x, y) with heading a.
Transform targetOf(SampleId n, double x, double y, double a) {
  const Transform stance{rotZ(a), Vec3(x, y, 0)};
  return stance * invert(map300().sample(n).t_stance_eff);
}

struct Trial {
  Transform y;
  Environment env;
};

std::vector<Trial> trials(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto set = orientationSet(32);
  std::vector<Trial> out;
  for (int i = 0; i < count; ++i) {
    Trial t;
    t.y = idrm::test::randomTarget(rng, set);
    t.env = idrm::test::randomEnvironment(rng, t.y);
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("collision update: degenerate environments") {
  const IdrmMap& map = map300();
  QueryScratch s;
  const Transform y = targetOf(0, 0.3, -0.2, 0.4);
  CHECK(collisionUpdate(map, y, Environment{}, s).size() == map.size());

  Environment all;
  all.obstacles.push_back({Sphere{y.translation, 10.0}, 1});
  CHECK(collisionUpdate(map, y, all, s).empty());

  // An obstacle far outside the grid removes nothing.
  Environment far;
  far.obstacles.push_back({Sphere{y.translation + Vec3(5, 0, 0), 0.5}, 1});
  CHECK(collisionUpdate(map, y, far, s).size() == map.size());
}

TEST_CASE("collision update equals the brute-force oracle in both frames") {
  const IdrmMap& map = map300();
  const auto& sv = sampleVoxels300();
  QueryScratch s;
  int nontrivial = 0;
  for (const Trial& t : trials(60, 41)) {
    const auto oracle = idrm::test::bruteFree(sv, idrm::test::bruteOccupied(map.grid(), t.y, t.env));
    const auto map_frame = collisionUpdate(map, t.y, t.env, s, FrameChoice::kMapFrame);
    CHECK(s.used_map_frame);
    CHECK(map_frame == oracle);
    const auto world_frame = collisionUpdate(map, t.y, t.env, s, FrameChoice::kWorldFrame);
    CHECK_FALSE(s.used_map_frame);
    CHECK(world_frame == oracle);
    collisionUpdate(map, t.y, t.env, s);
    CHECK(s.used_map_frame);  // 8000 voxels > a handful of obstacles
    nontrivial += (!oracle.empty() && oracle.size() < map.size()) ? 1 : 0;
  }
  CHECK(nontrivial > 20);
}

TEST_CASE("adding an obstacle never enlarges Q_free") {
  const IdrmMap& map = map300();
  QueryScratch s;
  std::mt19937_64 rng(42);
  for (Trial t : trials(40, 43)) {
    const auto before = collisionUpdate(map, t.y, t.env, s);
    t.env.obstacles.push_back(idrm::test::randomObstacle(rng, t.y.translation, 0.9, 99));
    const auto after = collisionUpdate(map, t.y, t.env, s);
    CHECK(std::includes(before.begin(), before.end(), after.begin(), after.end()));
  }
}

TEST_CASE("feasibility update equals the full-scan filter") {
  const IdrmMap& map = map300();
  QueryScratch s;
  const GroundTolerance tol;
  int nonempty = 0;
  for (const Trial& t : trials(60, 44)) {
    collisionUpdate(map, t.y, t.env, s);
    const auto oracle = idrm::test::bruteFeasible(map, s.free, t.y, tol);
    CHECK(feasibilityUpdate(map, t.y, tol, s) == oracle);
    CHECK(feasibilityUpdate(map, s.free, t.y, tol) == oracle);
    nonempty += oracle.empty() ? 0 : 1;
  }
  // Targets built from samples guarantee feasible candidates.
  for (SampleId n = 0; n < 30; ++n) {
    const Transform y = targetOf(n, 0.1 * n, -0.05 * n, 0.2 * n);
    collisionUpdate(map, y, Environment{}, s);
    const auto got = feasibilityUpdate(map, y, tol, s);
    CHECK(got == idrm::test::bruteFeasible(map, s.free, y, tol));
    CHECK(std::binary_search(got.begin(), got.end(), n));
  }
  CHECK(nonempty > 0);
}

TEST_CASE("feasibility update: degenerate tolerances and placements") {
  const IdrmMap& map = map300();
  QueryScratch s;
  // Grid entirely above the ground band.
  const Transform high{Mat3::Identity(), Vec3(0, 0, 5.0)};
  collisionUpdate(map, high, Environment{}, s);
  CHECK(feasibilityUpdate(map, high, GroundTolerance{}, s).empty());
  CHECK(groundVoxels(map.grid(), high, 0.05).empty());

  // Unbounded tolerances keep every free sample.
  const double inf = std::numeric_limits<double>::infinity();
  const Transform y = targetOf(3, 0, 0, 0);
  Environment env;
  env.obstacles.push_back({Sphere{y.translation + Vec3(0.4, 0, 0), 0.2}, 1});
  collisionUpdate(map, y, env, s);
  const std::vector<SampleId> free = s.free;
  CHECK(feasibilityUpdate(map, y, GroundTolerance{inf, inf, inf}, s) == free);
}

TEST_CASE("candidate ranking") {
  const IdrmMap& map = map300();
  const RobotModel& m = robot();
  std::vector<SampleId> all(map.size());
  for (SampleId n = 0; n < map.size(); ++n) all[n] = n;
  const Transform y = targetOf(7, 0.2, 0.1, 0.3);

  // No joint or stance terms: manipulability order.
  ScoreWeights g_only;
  g_only.joint_weights = VecX::Zero(m.dof());
  g_only.w_b = 0.0;
  const auto by_g = selectCandidates(map, all, y, m, m.nominalConfiguration(), g_only);
  for (std::size_t i = 1; i < by_g.size(); ++i) {
    CHECK(map.sample(by_g[i - 1].index).g >= map.sample(by_g[i].index).g);
    if (by_g[i - 1].score == by_g[i].score) CHECK(by_g[i - 1].index < by_g[i].index);
  }

  // No manipulability term, start at sample 7's placement: 7 ranks first.
  ScoreWeights dist_only;
  dist_only.w_m = 0.0;
  const auto by_d = selectCandidates(map, all, y, m, placeSample(map.sample(7), y), dist_only);
  CHECK(by_d.front().index == 7);
  CHECK(std::abs(by_d.front().score) < 1e-9);

  // Random weights against a direct evaluation of the score.
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    ScoreWeights w;
    w.w_m = u(rng);
    w.w_b = u(rng);
    w.joint_weights = VecX::NullaryExpr(m.dof(), [&] { return u(rng); });
    const Configuration q0 = m.nominalConfiguration(Transform{rotZ(u(rng)), Vec3(u(rng), -u(rng), 0)});
    const Vec3 s0 = forwardKinematics(m, q0).stance.translation;
    std::vector<std::pair<double, SampleId>> oracle;
    for (SampleId n : all) {
      const SampleRecord& r = map.sample(n);
      double jd = 0.0;
      for (int j = 0; j < m.dof(); ++j) jd += w.joint_weights[j] * std::pow(r.q.joints[j] - q0.joints[j], 2);
      const Vec3 st = (y * r.t_stance_eff).translation;
      const double score = w.w_m * r.g - (std::sqrt(jd) + w.w_b * std::hypot(st.x() - s0.x(), st.y() - s0.y()));
      oracle.emplace_back(-score, n);
    }
    std::sort(oracle.begin(), oracle.end());
    const auto ranked = selectCandidates(map, all, y, m, q0, w);
    REQUIRE(ranked.size() == oracle.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      CHECK(ranked[i].index == oracle[i].second);
      CHECK(ranked[i].score == doctest::Approx(-oracle[i].first).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(selectCandidates(map, {}, y, m, m.nominalConfiguration(), ScoreWeights{}), Error);
}

TEST_CASE("end-pose planning: success, stance goal and verification") {
  const IdrmMap& map = map300();
  const RobotModel& m = robot();
  const Configuration q0 = m.nominalConfiguration();
  int successes = 0;
  for (SampleId n = 0; n < 20; ++n) {
    const Transform y = targetOf(n * 7, 0.5 - 0.05 * n, 0.1 * n - 1.0, 0.3 * n);
    const EndPoseResult r = planEndPose(map, m, q0, y, Environment{});
    CHECK(r.free_count == map.size());
    if (!r.success()) continue;
    ++successes;
    REQUIRE(r.index.has_value());
    const Transform goal = y * map.sample(*r.index).t_stance_eff;
    CHECK((r.stance_goal.translation - goal.translation).norm() < 1e-15);
    CHECK(verifyEndPose(m, r.q, y, Environment{}, 1e-3, 1e-2));
    CHECK(r.trace.size() == static_cast<std::size_t>(r.candidates_tried));
    CHECK(r.candidates_tried >= 1);
  }
  CHECK(successes >= 18);
}

TEST_CASE("end-pose planning: failure outcomes and purity") {
  const IdrmMap& map = map300();
  const RobotModel& m = robot();
  const Configuration q0 = m.nominalConfiguration();
  const Transform y = targetOf(11, 0.0, 0.0, 0.0);

  // Target sealed inside a ball: every sample's hand is at the target.
  Environment walled;
  walled.obstacles.push_back({Sphere{y.translation, 0.2}, 1});
  const EndPoseResult blocked = planEndPose(map, m, q0, y, walled);
  CHECK(blocked.outcome == Outcome::kNoFeasibleSample);
  CHECK(blocked.candidates_tried == 0);

  PlanOptions none;
  none.max_candidates = 0;
  const EndPoseResult capped = planEndPose(map, m, q0, y, Environment{}, none);
  CHECK(capped.outcome == Outcome::kAllCandidatesFailed);
  CHECK(capped.candidates_tried == 0);

  const auto before = encodeMap(map);
  EndPosePlanner planner(map, m);
  const EndPoseResult a = planner.plan(q0, y, Environment{});
  const EndPoseResult b = planner.plan(q0, y, Environment{});
  CHECK(a.success());
  CHECK(a.index == b.index);
  CHECK(a.q == b.q);
  CHECK(encodeMap(map) == before);

  RobotModel other = m;
  other.base_link.mass += 1.0;
  try {
    EndPosePlanner bad(map, other);
    FAIL("digest mismatch accepted");
  } catch (const MapFileError& e) {
    CHECK(e.code() == MapFileError::Code::kDigestMismatch);
  }

  const auto j = resultToJson(a);
  for (const char* key : {"outcome", "success", "index", "score", "candidates_tried", "free_count", "feasible_count",
                          "timings_us", "endpose_time_s", "q", "stance_goal", "trace"})
    CHECK(j.contains(key));
  CHECK(j["outcome"] == "success");
}

TEST_CASE("placed samples stand level on the ground") {
  const IdrmMap& map = map300();
  std::mt19937_64 rng(46);
  for (int i = 0; i < 50; ++i) {
    const Transform y = idrm::test::randomTarget(rng, orientationSet(32));
    const SampleRecord& s = map.sample(static_cast<SampleId>(rng() % map.size()));
    const Configuration q = placeSample(s, y);
    const Frames f = forwardKinematics(robot(), q);
    CHECK(std::abs(f.stance.translation.z()) < 1e-12);
    CHECK((f.stance.rotation.col(2) - Vec3::UnitZ()).norm() < 1e-12);
    const Transform bar = y * s.t_stance_eff;
    CHECK((f.stance.translation.head<2>() - bar.translation.head<2>()).norm() < 1e-12);
    CHECK(q.joints == s.q.joints);
  }
}
