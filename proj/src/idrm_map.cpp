#include "idrm/idrm_map.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "idrm/error.hpp"
#include "idrm/robot_io.hpp"

namespace idrm {

namespace {

double halton(std::uint32_t i, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

std::vector<Mat3> orientationSet(int k) {
  std::vector<Mat3> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto n = static_cast<std::uint32_t>(i + 1);
    const double u1 = halton(n, 2), u2 = halton(n, 3), u3 = halton(n, 5);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
    Eigen::Quaterniond q(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));
    out.push_back(q.normalized().toRotationMatrix());
  }
  if (!out.empty()) {
    const Mat3 r0t = out[0].transpose();
    for (auto& r : out) r = r0t * r;
    out[0] = Mat3::Identity();
  }
  return out;
}

std::vector<SampleRecord> samplePostures(const RobotModel& m, const SamplingParams& p,
                                         SamplingStats* stats) {
  if (p.count == 0) throw SamplingError("sample count must be at least 1");
  if (p.orientations < 1) throw SamplingError("orientation set must not be empty");
  const std::vector<Mat3> orient = orientationSet(p.orientations);
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, p.orientations - 1);
  std::uniform_real_distribution<double> noise(-p.seed_noise, p.seed_noise);

  const Configuration nominal = m.nominalConfiguration();
  const VecX weights = defaultIkWeights(m);
  ConstraintSet c;
  c.fixed_base = true;
  c.balance = true;
  c.self_collision = true;

  SamplingStats st;
  std::vector<SampleRecord> out;
  out.reserve(p.count);
  std::size_t streak = 0;
  while (out.size() < p.count) {
    ++st.attempts;
    Vec3 pos;
    for (int d = 0; d < 3; ++d) pos[d] = p.region_lo[d] + (p.region_hi[d] - p.region_lo[d]) * unit(rng);
    const int o = pick(rng);
    Configuration seed = nominal;
    for (int j = 0; j < m.dof(); ++j) seed.joints[j] += noise(rng);

    c.target = Transform{orient[static_cast<std::size_t>(o)], pos};
    const IkResult r = solveIk(m, seed, nominal, c, weights, p.ik);
    bool ok = r.converged;
    SampleRecord rec;
    if (ok) {
      const Frames f = forwardKinematics(m, r.q);
      rec.q = r.q;
      rec.t_stance_eff = compose(invert(f.effector), f.stance);
      if (p.containment && !p.containment->index(rec.t_stance_eff.translation)) {
        ++st.outside_grid;
        ok = false;
      } else {
        rec.g = manipulability(jacobian(m, f));
        rec.index = static_cast<SampleId>(out.size());
      }
    } else {
      ++st.ik_failures;
    }
    if (ok) {
      out.push_back(std::move(rec));
      streak = 0;
    } else if (++streak >= p.max_consecutive_rejections) {
      st.accepted = out.size();
      if (stats) *stats = st;
      std::ostringstream msg;
      msg << "sampling stalled after " << streak << " consecutive rejections (" << out.size()
          << " accepted of " << st.attempts << " attempts, acceptance rate " << st.acceptanceRate()
          << ", " << st.ik_failures << " IK failures, " << st.outside_grid << " outside grid)";
      throw SamplingError(msg.str());
    }
  }
  st.accepted = out.size();
  if (stats) *stats = st;
  return out;
}

IdrmMap::IdrmMap(VoxelGrid grid, std::vector<SampleRecord> samples, VoxelLists reach,
                 VoxelLists occupation, MapMetadata meta)
    : grid_(std::move(grid)),
      samples_(std::move(samples)),
      reach_(std::move(reach)),
      occupation_(std::move(occupation)),
      meta_(meta),
      centers_(VoxelCenters::Of(grid_)) {
  for (int b : {4, 2}) blocks_.push_back(BlockUnions::Of(grid_, occupation_, samples_.size(), {b, b, b}));
}

std::vector<WorldSphere> effectorFrameSpheres(const RobotModel& m, const SampleRecord& s) {
  const Frames f = forwardKinematics(m, s.q);
  std::vector<WorldSphere> spheres = collisionSpheres(m, f);
  const Transform to_eff = invert(f.effector);
  for (auto& sp : spheres) sp.center = to_eff.apply(sp.center);
  return spheres;
}

std::vector<VoxelId> sampleVoxels(const RobotModel& m, const VoxelGrid& g, const VoxelCenters& c,
                                  const SampleRecord& s) {
  std::vector<VoxelId> out;
  const auto spheres = effectorFrameSpheres(m, s);
  voxelizeSpheres(g, c, spheres, out);
  return out;
}

IdrmMap buildIdrm(const RobotModel& m, std::vector<SampleRecord> samples, const VoxelGrid& grid,
                  MapMetadata meta) {
  if (samples.empty()) throw BuildError("cannot build a map from an empty sample list");
  const VoxelCenters centers = VoxelCenters::Of(grid);
  std::vector<std::vector<VoxelId>> reach(samples.size()), occ(samples.size());
  std::vector<std::size_t> offenders;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    samples[n].index = static_cast<SampleId>(n);
    const auto v = grid.index(samples[n].t_stance_eff.translation);
    if (!v) {
      offenders.push_back(n);
      continue;
    }
    reach[n].push_back(*v);
    occ[n] = sampleVoxels(m, grid, centers, samples[n]);
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << offenders.size() << " stance point(s) outside the grid; samples:";
    for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) msg << ' ' << offenders[i];
    if (offenders.size() > 20) msg << " ...";
    throw BuildError(msg.str());
  }
  meta.robot_digest = robotDigest(m);
  if (meta.extent == 0.0) meta.extent = grid.resolution() * grid.dims()[0];
  VoxelLists r = VoxelLists::FromSampleVoxels(grid.count(), reach);
  VoxelLists o = VoxelLists::FromSampleVoxels(grid.count(), occ);
  return IdrmMap(grid, std::move(samples), std::move(r), std::move(o), meta);
}

IdrmMap buildIdrm(const RobotModel& m, const SamplingParams& p, double resolution, double extent,
                  SamplingStats* stats) {
  const VoxelGrid grid = VoxelGrid::Centered(extent, resolution);
  SamplingParams sp = p;
  sp.containment = grid;
  auto samples = samplePostures(m, sp, stats);
  MapMetadata meta;
  meta.seed = p.seed;
  meta.orientations = static_cast<std::uint32_t>(p.orientations);
  meta.extent = extent;
  return buildIdrm(m, std::move(samples), grid, meta);
}

}  // namespace idrm
