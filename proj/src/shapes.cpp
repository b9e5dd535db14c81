#include "idrm/shapes.hpp"

#include <algorithm>
#include <cmath>

#include "idrm/error.hpp"

namespace idrm {

Obstacle Obstacle::transformed(const Transform& t) const {
  Obstacle out = *this;
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    out.shape = Sphere{t.apply(s->center), s->radius};
  } else {
    const auto& b = std::get<Box>(shape);
    out.shape = Box{t * b.pose, b.half_extents};
  }
  return out;
}

void Obstacle::aabb(Vec3& lo, Vec3& hi) const {
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    lo = s->center - Vec3::Constant(s->radius);
    hi = s->center + Vec3::Constant(s->radius);
    return;
  }
  const auto& b = std::get<Box>(shape);
  const Vec3 r = b.pose.rotation.cwiseAbs() * b.half_extents;
  lo = b.pose.translation - r;
  hi = b.pose.translation + r;
}

void Obstacle::validate() const {
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    if (!(s->radius > 0)) throw Error("obstacle " + std::to_string(id) + ": radius must be > 0");
  } else {
    const auto& b = std::get<Box>(shape);
    if (!(b.half_extents.minCoeff() > 0))
      throw Error("obstacle " + std::to_string(id) + ": half extents must be > 0");
  }
}

bool sphereIntersectsSphere(const Sphere& a, const Sphere& b) {
  const double r = a.radius + b.radius;
  return (a.center - b.center).squaredNorm() <= r * r;
}

bool sphereIntersectsAabb(const Vec3& c, double radius, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double q = 0.0;
    if (c[a] < lo[a]) q = lo[a] - c[a];
    else if (c[a] > hi[a]) q = c[a] - hi[a];
    d2 += q * q;
  }
  return d2 <= radius * radius;
}

bool sphereIntersectsBox(const Sphere& s, const Box& b) {
  const Vec3 local = b.pose.rotation.transpose() * (s.center - b.pose.translation);
  return sphereIntersectsAabb(local, s.radius, -b.half_extents, b.half_extents);
}

SatAxes SatAxes::Of(const Mat3& ra, const Vec3& ha, const Mat3& rb, const Vec3& hb) {
  SatAxes s;
  auto push = [&](const Vec3& l) {
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r += std::abs(l.dot(ra.col(i))) * ha[i];
    for (int i = 0; i < 3; ++i) r += std::abs(l.dot(rb.col(i))) * hb[i];
    s.axis[s.count] = l;
    s.reach[s.count] = r;
    ++s.count;
  };
  for (int i = 0; i < 3; ++i) push(ra.col(i));
  for (int i = 0; i < 3; ++i) push(rb.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 l = ra.col(i).cross(rb.col(j));
      // Parallel edges: the face axes already cover this direction.
      if (l.squaredNorm() > 1e-12) push(l);
    }
  }
  return s;
}

bool SatAxes::overlaps(const Vec3& d) const {
  for (int k = 0; k < count; ++k) {
    if (std::abs(axis[k].dot(d)) > reach[k]) return false;
  }
  return true;
}

bool boxIntersectsBox(const Box& a, const Box& b) {
  return SatAxes::Of(a.pose.rotation, a.half_extents, b.pose.rotation, b.half_extents)
      .overlaps(b.pose.translation - a.pose.translation);
}

bool sphereIntersectsObstacle(const Sphere& s, const Obstacle& o) {
  if (const auto* os = std::get_if<Sphere>(&o.shape)) return sphereIntersectsSphere(s, *os);
  return sphereIntersectsBox(s, std::get<Box>(o.shape));
}

bool voxelOverlapsObstacle(const VoxelGrid& g, VoxelId id, const Obstacle& obs,
                           const Transform& rel) {
  Vec3 lo, hi;
  g.bounds(id, lo, hi);
  const Obstacle local = obs.transformed(rel);
  if (const auto* s = std::get_if<Sphere>(&local.shape)) {
    return sphereIntersectsAabb(s->center, s->radius, lo, hi);
  }
  const Box voxel{Transform::FromTranslation(0.5 * (lo + hi)), Vec3::Constant(0.5 * g.resolution())};
  return boxIntersectsBox(voxel, std::get<Box>(local.shape));
}

}  // namespace idrm
