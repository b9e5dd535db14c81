#pragma once

#include <array>
#include <variant>
#include <vector>

#include "idrm/geometry.hpp"
#include "idrm/voxel_grid.hpp"

namespace idrm {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Oriented box; an axis-aligned box is a Box with identity rotation.
struct Box {
  Transform pose;
  Vec3 half_extents = Vec3::Zero();
};

struct Obstacle {
  std::variant<Sphere, Box> shape;
  int id = 0;

  /// The same obstacle expressed through `t` (new = t * old).
  Obstacle transformed(const Transform& t) const;
  /// Axis-aligned bounds in the obstacle's current frame.
  void aabb(Vec3& lo, Vec3& hi) const;
  /// Throws Error if radius or half extents are not strictly positive.
  void validate() const;
};

/// Obstacles above an optional ground plane z = 0.
struct Environment {
  bool ground = true;
  std::vector<Obstacle> obstacles;
};

bool sphereIntersectsSphere(const Sphere& a, const Sphere& b);
bool sphereIntersectsAabb(const Vec3& center, double radius, const Vec3& lo, const Vec3& hi);
bool sphereIntersectsBox(const Sphere& s, const Box& b);
/// Exact 15-axis separating axis test.
bool boxIntersectsBox(const Box& a, const Box& b);
bool sphereIntersectsObstacle(const Sphere& s, const Obstacle& o);

/// Does voxel `id`'s box intersect `obs`, where `rel` maps the obstacle's
/// frame into the grid frame?
bool voxelOverlapsObstacle(const VoxelGrid& g, VoxelId id, const Obstacle& obs,
                           const Transform& rel);

/// Separating-axis data for one fixed pair of box orientations and sizes.
/// Only the centre offset varies between tests, so axis lengths and projected
/// radius sums are precomputed. Degenerate edge-edge axes are dropped.
struct SatAxes {
  std::array<Vec3, 15> axis;
  std::array<double, 15> reach;
  int count = 0;

  static SatAxes Of(const Mat3& rot_a, const Vec3& half_a, const Mat3& rot_b, const Vec3& half_b);
  /// True iff no axis separates boxes whose centres differ by `d`.
  bool overlaps(const Vec3& d) const;
};

}  // namespace idrm
