#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "idrm/geometry.hpp"
#include "idrm/shapes.hpp"

namespace idrm {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Jacobian6 = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct CollisionSphere {
  Vec3 center = Vec3::Zero();  // link frame
  double radius = 0.0;
};

struct Link {
  std::vector<CollisionSphere> spheres;
  double mass = 0.0;
  Vec3 com = Vec3::Zero();  // link frame
};

/// Revolute joint. The child link frame is parent * origin * Rot(axis, q).
struct Joint {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  Transform origin;
  double lower = 0.0;
  double upper = 0.0;
};

/// Whole-body configuration: floating base pose plus N joint angles.
struct Configuration {
  Transform base;
  VecX joints;

  bool operator==(const Configuration& o) const {
    return base == o.base && joints.size() == o.joints.size() && joints == o.joints;
  }
};

/// World frames produced by forward kinematics. links[0] is the base link,
/// links[j + 1] is the link driven by joint j.
struct Frames {
  std::vector<Transform> links;
  Transform effector;
  Transform stance;
};

struct WorldSphere {
  Vec3 center;
  double radius;
  int link;
};

/// Floating-base serial chain with sphere collision geometry.
///
/// The stance frame is a fixed offset from the base (the foot-print frame on
/// the floor); the support polygon lives in its xy-plane.
class RobotModel {
 public:
  std::string name;
  Link base_link;
  std::vector<Joint> joints;
  std::vector<Link> links;  // links[j] is moved by joints[j]
  Transform stance_offset;   // base -> stance
  Transform effector_offset; // last link -> effector
  std::vector<Eigen::Vector2d> support_polygon;
  VecX nominal;  // nominal joint angles

  int dof() const { return static_cast<int>(joints.size()); }
  int linkCount() const { return dof() + 1; }
  const Link& link(int i) const { return i == 0 ? base_link : links[i - 1]; }
  double totalMass() const;
  int sphereCount() const;

  /// Throws RobotModelError naming the first violated invariant.
  void validate() const;

  /// Nominal joints with the stance frame at `stance` (default: world origin).
  Configuration nominalConfiguration(const Transform& stance = Transform::Identity()) const;
  /// Base pose that puts the stance frame at `stance`.
  Transform baseForStance(const Transform& stance) const;

  VecX lowerLimits() const;
  VecX upperLimits() const;
  bool withinLimits(const VecX& q) const;
  VecX clampToLimits(const VecX& q) const;
};

/// Forward kinematics. Throws DimensionError on a size mismatch.
Frames forwardKinematics(const RobotModel& m, const Configuration& q);

/// Effector Jacobian with the base held fixed: rows 0-2 linear velocity,
/// rows 3-5 angular velocity, both in world coordinates.
Jacobian6 jacobian(const RobotModel& m, const Configuration& q);
Jacobian6 jacobian(const RobotModel& m, const Frames& f);

/// sqrt(det(J J^T)), 0 at singular postures.
double manipulability(const RobotModel& m, const Configuration& q);
double manipulability(const Jacobian6& j);

std::vector<WorldSphere> collisionSpheres(const RobotModel& m, const Configuration& q);
std::vector<WorldSphere> collisionSpheres(const RobotModel& m, const Frames& f);

/// No overlapping sphere pair between links more than one apart in the chain.
bool selfCollisionFree(const RobotModel& m, const Configuration& q);
bool selfCollisionFree(const RobotModel& m, const std::vector<WorldSphere>& spheres);

Vec3 centerOfMass(const RobotModel& m, const Frames& f);

/// Centre of mass projected along world z into the stance xy-plane, in stance
/// coordinates. False if the stance plane is vertical.
bool comInStance(const RobotModel& m, const Frames& f, Eigen::Vector2d& out);

/// Quasi-static balance: CoM projection inside the support polygon (boundary
/// inclusive).
bool balanced(const RobotModel& m, const Configuration& q);
bool balanced(const RobotModel& m, const Frames& f);

/// Signed distance from p to the convex polygon boundary; negative inside.
double polygonSignedDistance(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p,
                             Eigen::Vector2d* outward = nullptr);

/// Any robot sphere touching any obstacle (exact sphere-vs-primitive).
bool collidesWithEnvironment(const std::vector<WorldSphere>& spheres, const Environment& env);

}  // namespace idrm
