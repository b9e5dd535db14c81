#pragma once

// Shared fixtures and reference implementations for the unit tests. The
// oracles here are written from first principles and deliberately avoid the
// library code paths they check.

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "idrm/idrm_map.hpp"
#include "idrm/query.hpp"
#include "idrm/robot_io.hpp"
#include "idrm/shapes.hpp"

namespace idrm::test {

inline Mat3 randomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Transform randomTransform(std::mt19937_64& rng, double span = 2.0) {
  std::uniform_real_distribution<double> u(-span, span);
  return {randomRotation(rng), Vec3(u(rng), u(rng), u(rng))};
}

inline VecX randomJoints(const RobotModel& m, std::mt19937_64& rng) {
  VecX q(m.dof());
  for (int j = 0; j < m.dof(); ++j) {
    std::uniform_real_distribution<double> u(m.joints[j].lower, m.joints[j].upper);
    q[j] = u(rng);
  }
  return q;
}

inline Eigen::Isometry3d iso(const Transform& t) {
  Eigen::Isometry3d r = Eigen::Isometry3d::Identity();
  r.linear() = t.rotation;
  r.translation() = t.translation;
  return r;
}

/// Chain of homogeneous transforms built from Eigen::AngleAxis.
inline std::vector<Eigen::Isometry3d> naiveLinkFrames(const RobotModel& m, const Configuration& q) {
  std::vector<Eigen::Isometry3d> out{iso(q.base)};
  Eigen::Isometry3d t = iso(q.base);
  for (int j = 0; j < m.dof(); ++j) {
    t = t * iso(m.joints[j].origin) * Eigen::AngleAxisd(q.joints[j], m.joints[j].axis.normalized());
    out.push_back(t);
  }
  return out;
}

inline Eigen::Isometry3d naiveEffector(const RobotModel& m, const Configuration& q) {
  return naiveLinkFrames(m, q).back() * iso(m.effector_offset);
}

// Euclidean projections onto convex primitives, used by the
// alternating-projection distance below.
inline Vec3 projectAabb(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

inline Vec3 projectBox(const Vec3& p, const Box& b) {
  const Vec3 local = b.pose.rotation.transpose() * (p - b.pose.translation);
  return b.pose.rotation * projectAabb(local, -b.half_extents, b.half_extents) + b.pose.translation;
}

inline Vec3 projectSphere(const Vec3& p, const Sphere& s) {
  const Vec3 d = p - s.center;
  const double n = d.norm();
  return n <= s.radius ? p : Vec3(s.center + d * (s.radius / n));
}

inline Vec3 projectObstacle(const Vec3& p, const Obstacle& o) {
  if (const auto* s = std::get_if<Sphere>(&o.shape)) return projectSphere(p, *s);
  return projectBox(p, std::get<Box>(o.shape));
}

/// Distance between an axis-aligned box and an obstacle by alternating
/// projections (converges to the gap for disjoint sets, to 0 otherwise).
inline double alternatingDistance(const Vec3& lo, const Vec3& hi, const Obstacle& o, int iterations = 20000) {
  Vec3 x = 0.5 * (lo + hi);
  double gap = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Vec3 a = projectObstacle(x, o);
    x = projectAabb(a, lo, hi);
    gap = (a - x).norm();
    if (gap < 1e-12) break;
  }
  return gap;
}

inline bool pointInObstacle(const Vec3& p, const Obstacle& o) {
  if (const auto* s = std::get_if<Sphere>(&o.shape)) return (p - s->center).squaredNorm() <= s->radius * s->radius;
  const auto& b = std::get<Box>(o.shape);
  const Vec3 l = b.pose.rotation.transpose() * (p - b.pose.translation);
  return (l.cwiseAbs().array() <= b.half_extents.array()).all();
}

/// Squared distance from a point to an axis-aligned box, axis by axis.
inline double pointAabbDistanceSq(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = std::max({lo[a] - p[a], 0.0, p[a] - hi[a]});
    d += e * e;
  }
  return d;
}

/// Every voxel of g touched by any sphere (grid-frame centres), by scanning
/// the whole grid.
inline std::vector<VoxelId> bruteVoxelize(const VoxelGrid& g, const std::vector<WorldSphere>& spheres) {
  std::vector<VoxelId> out;
  const double r = g.resolution();
  for (int z = 0; z < g.dims()[2]; ++z)
    for (int y = 0; y < g.dims()[1]; ++y)
      for (int x = 0; x < g.dims()[0]; ++x) {
        const Vec3 lo = g.origin() + r * Vec3(x, y, z);
        const Vec3 hi = lo + Vec3::Constant(r);
        for (const auto& s : spheres)
          if (pointAabbDistanceSq(s.center, lo, hi) <= s.radius * s.radius) {
            out.push_back(static_cast<VoxelId>(x + g.dims()[0] * (y + g.dims()[1] * z)));
            break;
          }
      }
  return out;
}

/// Per-sample voxel sets of a map, recomputed from the sample postures.
inline std::vector<std::vector<VoxelId>> bruteSampleVoxels(const RobotModel& m, const IdrmMap& map) {
  std::vector<std::vector<VoxelId>> out;
  for (const auto& s : map.samples()) out.push_back(bruteVoxelize(map.grid(), effectorFrameSpheres(m, s)));
  return out;
}

/// Voxels of the map grid, placed in the world by y, that overlap any
/// obstacle. Uses the single-pair exact test on every voxel.
inline std::vector<std::uint8_t> bruteOccupied(const VoxelGrid& g, const Transform& y, const Environment& env) {
  std::vector<std::uint8_t> mask(g.count(), 0);
  const Transform to_map = invert(y);
  for (const auto& o : env.obstacles)
    for (std::size_t v = 0; v < g.count(); ++v)
      if (!mask[v] && voxelOverlapsObstacle(g, static_cast<VoxelId>(v), o, to_map)) mask[v] = 1;
  return mask;
}

/// Q_free by definition: samples none of whose voxels is occupied.
inline std::vector<SampleId> bruteFree(const std::vector<std::vector<VoxelId>>& sample_voxels,
                                       const std::vector<std::uint8_t>& occupied) {
  std::vector<SampleId> out;
  for (std::size_t n = 0; n < sample_voxels.size(); ++n) {
    bool free = true;
    for (VoxelId v : sample_voxels[n]) free = free && !occupied[v];
    if (free) out.push_back(static_cast<SampleId>(n));
  }
  return out;
}

/// Full-scan ground filter over Q_free, without the reach-list prefilter.
inline std::vector<SampleId> bruteFeasible(const IdrmMap& map, const std::vector<SampleId>& q_free,
                                           const Transform& y, const GroundTolerance& tol) {
  std::vector<SampleId> out;
  for (SampleId n : q_free) {
    const Transform st = y * map.sample(n).t_stance_eff;
    const Mat3& r = st.rotation;
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    if (std::abs(st.translation.z()) < tol.z && std::abs(roll) < tol.roll && std::abs(pitch) < tol.pitch)
      out.push_back(n);
  }
  return out;
}

inline Obstacle randomObstacle(std::mt19937_64& rng, const Vec3& around, double spread, int id) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), s(0.05, 0.35);
  const Vec3 c = around + spread * Vec3(u(rng), u(rng), u(rng));
  if (rng() % 2 == 0) return {Sphere{c, s(rng)}, id};
  Box b;
  b.pose = Transform{randomRotation(rng), c};
  b.half_extents = Vec3(s(rng), s(rng), s(rng));
  return {b, id};
}

/// A target the map can plausibly serve: an orientation-set rotation under a
/// random heading (sometimes perturbed), at reachable height.
inline Transform randomTarget(std::mt19937_64& rng, const std::vector<Mat3>& orientations) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Mat3 base = orientations[rng() % orientations.size()];
  Mat3 r = rotZ(2.0 * M_PI * u(rng)) * base;
  if (u(rng) < 0.3) r = r * expSO3(Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5) * 0.2);
  return {r, Vec3(3.0 * u(rng) - 1.5, 3.0 * u(rng) - 1.5, 0.3 + 1.0 * u(rng))};
}

inline Environment randomEnvironment(std::mt19937_64& rng, const Transform& y, int max_obstacles = 5) {
  Environment env;
  const int n = 1 + static_cast<int>(rng() % max_obstacles);
  for (int i = 0; i < n; ++i) env.obstacles.push_back(randomObstacle(rng, y.translation, 0.9, i + 1));
  return env;
}

/// Small deterministic map on the standard 20^3 grid, built once per process.
inline const IdrmMap& smallMap(std::size_t count = 300) {
  static const RobotModel m = demoRobot();
  static std::map<std::size_t, IdrmMap> cache;
  auto it = cache.find(count);
  if (it == cache.end()) {
    SamplingParams p;
    p.count = count;
    p.seed = 3;
    it = cache.emplace(count, buildIdrm(m, p, 0.1, 2.0)).first;
  }
  return it->second;
}

inline std::string tempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "idrm_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace idrm::test
