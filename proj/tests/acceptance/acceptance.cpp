// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Large maps are cached under IDRM_ACCEPTANCE_CACHE.

#include <Eigen/SVD>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "idrm/baselines.hpp"
#include "idrm/bench.hpp"
#include "idrm/error.hpp"
#include "idrm/ik.hpp"
#include "support.hpp"

using namespace idrm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and sizes.
constexpr std::size_t kLargeCount = 100000;
constexpr std::uint64_t kLargeSeed = 7;
constexpr double kResolution = 0.1;
constexpr double kExtent = 2.0;
constexpr int kOracleTrials = 200;
constexpr double kOracleBudgetS = 120.0;
constexpr int kSoundnessScenes = 100;
constexpr double kPosTol = 1e-3;
constexpr double kRotTol = 1e-2;
constexpr int kFreeSpaceQueries = 50;
constexpr int kTimingRepeats = 5;
constexpr double kHardEasyRatio = 3.0;
constexpr double kLinearR2 = 0.99;
constexpr double kJacobianTol = 1e-5;
constexpr double kManipRelTol = 1e-8;
constexpr double kStanceTol = 1e-9;
constexpr int kPropertyScenes = 100;
constexpr double kLatencyS = 0.250;
constexpr double kCollisionS = 0.100;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  C" << id << " " << name << "  (" << detail << ")" << std::endl;
  if (!ok) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

const RobotModel& robot() {
  static const RobotModel m = demoRobot();
  return m;
}

std::string cacheDir() {
  const fs::path d(IDRM_ACCEPTANCE_CACHE);
  fs::create_directories(d);
  return d.string();
}

std::optional<IdrmMap> tryLoad(const std::string& path, std::size_t count) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    IdrmMap map = loadMap(path, &robot());
    if (map.size() == count && map.meta().seed == kLargeSeed) return map;
  } catch (const Error&) {
  }
  return std::nullopt;
}

// The 10^5 map and its 10^4 / 5*10^4 prefixes, built once and cached.
struct LargeMaps {
  IdrmMap full;
  std::vector<std::pair<std::size_t, std::string>> files;
};

LargeMaps largeMaps() {
  LargeMaps out;
  const std::string dir = cacheDir();
  auto path = [&](std::size_t n) { return dir + "/map_" + std::to_string(n) + ".idrm"; };
  if (auto m = tryLoad(path(kLargeCount), kLargeCount)) {
    out.full = std::move(*m);
  } else {
    std::cout << "building the " << kLargeCount << "-sample map (cached afterwards)..." << std::endl;
    SamplingParams p;
    p.count = kLargeCount;
    p.seed = kLargeSeed;
    SamplingStats st;
    const auto t0 = Clock::now();
    out.full = buildIdrm(robot(), p, kResolution, kExtent, &st);
    std::cout << fmt("  built in %.1f s, sampling acceptance %.1f%%", since(t0), 100.0 * st.acceptanceRate())
              << std::endl;
    saveMap(out.full, path(kLargeCount));
  }
  for (std::size_t n : {kLargeCount / 10, kLargeCount / 2}) {
    if (!tryLoad(path(n), n)) {
      std::vector<SampleRecord> prefix(out.full.samples().begin(), out.full.samples().begin() + n);
      saveMap(buildIdrm(robot(), std::move(prefix), out.full.grid(), out.full.meta()), path(n));
    }
    out.files.emplace_back(n, path(n));
  }
  out.files.emplace_back(kLargeCount, path(kLargeCount));
  return out;
}

struct Trial {
  const IdrmMap* map;
  const std::vector<std::vector<VoxelId>>* voxels;
  Transform y;
  Environment env;
};

struct Scene {
  Transform y;
  Environment env;
};

std::vector<Scene> randomScenes(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto set = orientationSet(32);
  std::vector<Scene> out;
  for (int i = 0; i < count; ++i) {
    const Transform y = idrm::test::randomTarget(rng, set);
    out.push_back({y, idrm::test::randomEnvironment(rng, y)});
  }
  return out;
}

// Criteria 1 and 2: small randomised maps against the brute-force oracles.
void oracleCriteria() {
  const auto t0 = Clock::now();
  const std::size_t sizes[] = {250, 500, 1000, 2000};
  std::vector<IdrmMap> maps;
  std::vector<std::vector<std::vector<VoxelId>>> voxels;
  for (std::size_t i = 0; i < 4; ++i) {
    SamplingParams p;
    p.count = sizes[i];
    p.seed = 11 + i;
    maps.push_back(buildIdrm(robot(), p, kResolution, kExtent));
    voxels.push_back(idrm::test::bruteSampleVoxels(robot(), maps.back()));
  }
  std::vector<Trial> trials;
  const auto scenes = randomScenes(kOracleTrials, 101);
  for (int i = 0; i < kOracleTrials; ++i) trials.push_back({&maps[i % 4], &voxels[i % 4], scenes[i].y, scenes[i].env});

  QueryScratch s;
  const GroundTolerance tol;
  int free_ok = 0, feas_ok = 0, partial = 0, nonempty = 0;
  for (const Trial& t : trials) {
    const auto oracle = idrm::test::bruteFree(*t.voxels, idrm::test::bruteOccupied(t.map->grid(), t.y, t.env));
    const auto got = collisionUpdate(*t.map, t.y, t.env, s);
    free_ok += got == oracle ? 1 : 0;
    partial += (!oracle.empty() && oracle.size() < t.map->size()) ? 1 : 0;
    const auto feas_oracle = idrm::test::bruteFeasible(*t.map, oracle, t.y, tol);
    feas_ok += feasibilityUpdate(*t.map, t.y, tol, s) == feas_oracle ? 1 : 0;
    nonempty += feas_oracle.empty() ? 0 : 1;
  }
  const double elapsed = since(t0);
  const int n = static_cast<int>(trials.size());
  report(1, "collision update equals brute-force oracle", free_ok == n && elapsed < kOracleBudgetS,
         fmt("%d/%d equal, %d with partial invalidation, M<=2000, k=%zu, %.1f s incl. oracle", free_ok, n, partial,
             maps[0].grid().count(), elapsed));
  report(2, "feasibility update equals full-scan filter", feas_ok == n,
         fmt("%d/%d equal, %d with nonempty Q_feasible", feas_ok, n, nonempty));
}

std::vector<Scenario> mixedScenarios(int count) {
  std::vector<Scenario> out;
  for (std::uint64_t seed = 1; static_cast<int>(out.size()) < count; ++seed)
    for (int id = 0; id < 10 && static_cast<int>(out.size()) < count; ++id)
      for (Difficulty d : {Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard})
        if (static_cast<int>(out.size()) < count) out.push_back(generateScenario(d, id, seed));
  return out;
}

void soundness(const IdrmMap& map) {
  EndPosePlanner planner(map, robot());
  const Configuration q0 = benchStart(robot());
  int success = 0, verified = 0;
  for (const Scenario& s : mixedScenarios(kSoundnessScenes)) {
    const EndPoseResult r = planner.plan(q0, s.target, s.env);
    if (!r.success()) continue;
    ++success;
    verified += verifyEndPose(robot(), r.q, s.target, s.env, kPosTol, kRotTol) ? 1 : 0;
  }
  report(3, "every iDRM success verifies independently", verified == success,
         fmt("%d/%d successes verified over %d scenarios", verified, success, kSoundnessScenes));
}

void freeSpaceAgreement(const IdrmMap& map) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto set = orientationSet(32);
  const Configuration q0 = benchStart(robot());
  PlanOptions opt;
  BaselineBudget budget;
  int same = 0, solved = 0, neither = 0;
  for (int i = 0; i < kFreeSpaceQueries; ++i) {
    Transform y;
    if (i % 2 == 0) {
      y = idrm::test::randomTarget(rng, set);
    } else {
      // Effector pose of a stored sample placed at a random stance.
      const SampleId n = static_cast<SampleId>(rng() % map.size());
      y = Transform{rotZ(M_PI * u(rng)), Vec3(u(rng), u(rng), 0)} * invert(map.sample(n).t_stance_eff);
    }
    const EndPoseResult a = planEndPose(map, robot(), q0, y, Environment{}, opt);
    const EndPoseResult b = irmPlan(map, robot(), q0, y, Environment{}, opt, budget);
    // Both may fail under their own budgets; only the chosen sample counts.
    same += a.index == b.index ? 1 : 0;
    neither += !a.index && !b.index ? 1 : 0;
    solved += a.success() ? 1 : 0;
  }
  report(4, "IRM and iDRM pick the same sample in free space", same == kFreeSpaceQueries,
         fmt("%d/%d identical n*, %d solved, %d unsolved by both", same, kFreeSpaceQueries, solved, neither));
}

struct Timing {
  double best_s;   // fastest of the repeats
  double first_s;  // first repeat
  double collision_s;
  int candidates;
  bool success;
};

Timing timeCell(BenchContext& ctx, Planner p, const Scenario& s) {
  BenchConfig cfg;
  Timing t{1e300, 0.0, 0.0, 0, false};
  for (int r = 0; r < kTimingRepeats; ++r) {
    const BenchRow row = runCell(ctx, p, s, 0, cfg.seed, cfg);
    if (r == 0) {
      t.first_s = row.endpose_time_s;
      t.collision_s = row.collision_us * 1e-6;
      t.candidates = row.candidates_tried;
      t.success = row.success;
    }
    t.best_s = std::min(t.best_s, row.endpose_time_s);
  }
  return t;
}

// Criteria 5 and 10 share the timing runs.
void performance(const IdrmMap& map) {
  BenchContext ctx{&map, &robot(), nullptr};
  std::map<std::pair<Planner, Difficulty>, std::vector<Timing>> cells;
  for (Difficulty d : {Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard})
    for (int id = 0; id < 10; ++id) {
      const Scenario s = generateScenario(d, id, BenchConfig{}.seed);
      cells[{Planner::kIdrm, d}].push_back(timeCell(ctx, Planner::kIdrm, s));
      if (d != Difficulty::kMedium) cells[{Planner::kIrm, d}].push_back(timeCell(ctx, Planner::kIrm, s));
    }
  auto med = [&](Planner p, Difficulty d, const std::function<double(const Timing&)>& f) {
    std::vector<double> v;
    for (const Timing& t : cells[{p, d}]) v.push_back(f(t));
    return median(v);
  };
  auto best = [](const Timing& t) { return t.best_s; };
  auto cand = [](const Timing& t) { return static_cast<double>(t.candidates); };
  auto succ = [&](Planner p, Difficulty d) {
    int n = 0;
    for (const Timing& t : cells[{p, d}]) n += t.success ? 1 : 0;
    return n;
  };

  const double easy = med(Planner::kIdrm, Difficulty::kEasy, best);
  const double hard = med(Planner::kIdrm, Difficulty::kHard, best);
  const double irm_hard = med(Planner::kIrm, Difficulty::kHard, best);
  const double c_idrm = med(Planner::kIdrm, Difficulty::kHard, cand);
  const double c_irm = med(Planner::kIrm, Difficulty::kHard, cand);
  report(5, "(a) iDRM hard/easy median time ratio", hard / easy < kHardEasyRatio,
         fmt("%.2f ms / %.2f ms = %.2f, limit %.1f", 1e3 * hard, 1e3 * easy, hard / easy, kHardEasyRatio));
  report(5, "(b) iDRM hard median time below IRM", hard < irm_hard,
         fmt("iDRM %.2f ms vs IRM %.2f ms, successes %d/10 vs %d/10", 1e3 * hard, 1e3 * irm_hard,
             succ(Planner::kIdrm, Difficulty::kHard), succ(Planner::kIrm, Difficulty::kHard)));
  report(5, "(c) iDRM hard median candidates not above IRM", c_idrm <= c_irm,
         fmt("iDRM %.1f vs IRM %.1f", c_idrm, c_irm));

  std::vector<double> latency, collision;
  for (Difficulty d : {Difficulty::kEasy, Difficulty::kMedium, Difficulty::kHard})
    for (const Timing& t : cells[{Planner::kIdrm, d}]) {
      latency.push_back(t.first_s);
      collision.push_back(t.collision_s);
    }
  const double lat = median(latency), col = median(collision);
  report(10, "latency target at M=1e5", lat < kLatencyS && col < kCollisionS,
         fmt("median end-pose %.2f ms (limit %.0f), collision update %.2f ms (limit %.0f), max %.2f ms", 1e3 * lat,
             1e3 * kLatencyS, 1e3 * col, 1e3 * kCollisionS, 1e3 * *std::max_element(latency.begin(), latency.end())));
}

void linearity(const LargeMaps& maps) {
  std::vector<double> x, y;
  MemoryBreakdown biggest;
  bool lists_dominate = true;
  for (const auto& [n, path] : maps.files) {
    MemoryBreakdown b;
    loadMap(path, &robot(), &b);
    x.push_back(static_cast<double>(n));
    y.push_back(static_cast<double>(fs::file_size(path)));
    lists_dominate = lists_dominate && b.reach_lists + b.occupation_lists > b.configurations;
    biggest = b;
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    ss_res += e * e;
  }
  const double r2 = 1.0 - ss_res / syy;
  report(6, "map size linear in M, lists dominate", r2 > kLinearR2 && lists_dominate,
         fmt("R^2 = %.6f, %.0f B/sample; at 1e5 lists %.1f MB vs configurations %.1f MB", r2, slope,
             (biggest.reach_lists + biggest.occupation_lists) / 1e6, biggest.configurations / 1e6));
}

void kernels(const IdrmMap& map) {
  const RobotModel& m = robot();
  std::mt19937_64 rng(707);
  const double h = 1e-6;
  double jac = 0.0, manip = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Configuration q{idrm::test::randomTransform(rng), idrm::test::randomJoints(m, rng)};
    const Jacobian6 j = jacobian(m, q);
    for (int c = 0; c < m.dof(); ++c) {
      Configuration p = q, n = q;
      p.joints[c] += h;
      n.joints[c] -= h;
      const Frames fp = forwardKinematics(m, p), fn = forwardKinematics(m, n);
      Eigen::Matrix<double, 6, 1> fd;
      fd.head<3>() = (fp.effector.translation - fn.effector.translation) / (2 * h);
      fd.tail<3>() = logSO3(fp.effector.rotation * fn.effector.rotation.transpose()) / (2 * h);
      jac = std::max(jac, (fd - j.col(c)).cwiseAbs().maxCoeff());
    }
    const double oracle = Eigen::JacobiSVD<MatX>(j).singularValues().prod();
    manip = std::max(manip, std::abs(manipulability(m, q) - oracle) / std::max(oracle, 1e-12));
  }

  double stance = 0.0;
  for (const SampleRecord& s : map.samples()) {
    const Frames f = forwardKinematics(m, s.q);
    const Transform back = f.effector * s.t_stance_eff;
    stance = std::max({stance, (back.translation - f.stance.translation).cwiseAbs().maxCoeff(),
                       (back.rotation - f.stance.rotation).cwiseAbs().maxCoeff()});
  }

  bool deterministic = true;
  const Configuration nom = m.nominalConfiguration();
  for (int i = 0; i < 20; ++i) {
    ConstraintSet c;
    c.target = forwardKinematics(m, Configuration{nom.base, idrm::test::randomJoints(m, rng)}).effector;
    c.stance_lock = i % 2 == 0;
    c.balance = i % 2 == 0;
    c.self_collision = true;
    const Configuration seed{nom.base, idrm::test::randomJoints(m, rng)};
    const IkResult a = solveIk(m, seed, nom, c, defaultIkWeights(m));
    const IkResult b = solveIk(m, seed, nom, c, defaultIkWeights(m));
    deterministic = deterministic && a.q == b.q && a.iterations == b.iterations && a.history == b.history;
  }
  report(7, "numerical kernels",
         jac <= kJacobianTol && manip <= kManipRelTol && stance <= kStanceTol && deterministic,
         fmt("Jacobian %.2e, manipulability rel %.2e, stance round trip %.2e over %zu samples, IK %s", jac, manip,
             stance, map.size(), deterministic ? "bit-identical" : "NOT deterministic"));
}

void properties(const IdrmMap& map) {
  QueryScratch s;
  std::mt19937_64 rng(808);
  int mono = 0, frames = 0, shrunk = 0;
  for (Scene sc : randomScenes(kPropertyScenes, 909)) {
    const std::vector<SampleId> before = collisionUpdate(map, sc.y, sc.env, s, FrameChoice::kMapFrame);
    const std::vector<SampleId> world = collisionUpdate(map, sc.y, sc.env, s, FrameChoice::kWorldFrame);
    frames += before == world ? 1 : 0;
    sc.env.obstacles.push_back(idrm::test::randomObstacle(rng, sc.y.translation, 0.9, 99));
    const auto& after = collisionUpdate(map, sc.y, sc.env, s);
    mono += std::includes(before.begin(), before.end(), after.begin(), after.end()) ? 1 : 0;
    shrunk += after.size() < before.size() ? 1 : 0;
  }
  report(8, "adding an obstacle never enlarges Q_free", mono == kPropertyScenes,
         fmt("%d/%d subsets, %d strictly smaller, M=%zu", mono, kPropertyScenes, shrunk, map.size()));
  report(9, "map-frame and world-frame updates agree", frames == kPropertyScenes,
         fmt("%d/%d identical, M=%zu", frames, kPropertyScenes, map.size()));
}

}  // namespace

int main() {
  try {
    oracleCriteria();
    const LargeMaps large = largeMaps();
    soundness(large.full);
    freeSpaceAgreement(large.full);
    performance(large.full);
    linearity(large);
    kernels(large.full);
    properties(large.full);
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
