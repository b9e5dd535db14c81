#include "idrm/robot_model.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "idrm/error.hpp"

namespace idrm {

namespace {

Mat3 axisRotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

void validateLink(const Link& l, const std::string& path) {
  if (l.spheres.empty()) throw RobotModelError(path + ".spheres", "link needs at least one collision sphere");
  for (std::size_t s = 0; s < l.spheres.size(); ++s) {
    if (!(l.spheres[s].radius > 0))
      throw RobotModelError(path + ".spheres[" + std::to_string(s) + "].radius", "must be > 0");
  }
  if (!(l.mass >= 0)) throw RobotModelError(path + ".mass", "must be >= 0");
}

}  // namespace

double RobotModel::totalMass() const {
  double m = base_link.mass;
  for (const auto& l : links) m += l.mass;
  return m;
}

int RobotModel::sphereCount() const {
  int n = static_cast<int>(base_link.spheres.size());
  for (const auto& l : links) n += static_cast<int>(l.spheres.size());
  return n;
}

void RobotModel::validate() const {
  if (joints.empty()) throw RobotModelError("joints", "need at least one joint");
  if (links.size() != joints.size())
    throw RobotModelError("joints", "every joint needs exactly one child link");
  validateLink(base_link, "base_link");
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const std::string p = "joints[" + std::to_string(j) + "]";
    const Joint& jt = joints[j];
    if (std::abs(jt.axis.norm() - 1.0) > 1e-9) throw RobotModelError(p + ".axis", "must be a unit vector");
    if (!(jt.lower < jt.upper)) throw RobotModelError(p + ".limits", "lower must be < upper");
    validateLink(links[j], p + ".link");
  }
  if (!(totalMass() > 0)) throw RobotModelError("mass", "total mass must be > 0");
  if (nominal.size() != dof()) throw RobotModelError("nominal", "length must equal the joint count");
  for (int j = 0; j < dof(); ++j) {
    if (nominal[j] < joints[j].lower || nominal[j] > joints[j].upper)
      throw RobotModelError("nominal[" + std::to_string(j) + "]", "outside joint limits");
  }
  const auto& poly = support_polygon;
  if (poly.size() < 3) throw RobotModelError("support_polygon", "need at least 3 vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) area += cross2(poly[i], poly[(i + 1) % poly.size()]);
  if (!(area > 1e-12)) throw RobotModelError("support_polygon", "must be counter-clockwise with nonzero area");
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const auto& c = poly[(i + 2) % poly.size()];
    if (cross2(b - a, c - b) < -1e-12)
      throw RobotModelError("support_polygon[" + std::to_string((i + 1) % poly.size()) + "]",
                            "polygon is not convex");
  }
}

Transform RobotModel::baseForStance(const Transform& stance) const {
  return stance * invert(stance_offset);
}

Configuration RobotModel::nominalConfiguration(const Transform& stance) const {
  return {baseForStance(stance), nominal};
}

VecX RobotModel::lowerLimits() const {
  VecX v(dof());
  for (int j = 0; j < dof(); ++j) v[j] = joints[j].lower;
  return v;
}

VecX RobotModel::upperLimits() const {
  VecX v(dof());
  for (int j = 0; j < dof(); ++j) v[j] = joints[j].upper;
  return v;
}

bool RobotModel::withinLimits(const VecX& q) const {
  for (int j = 0; j < dof(); ++j) {
    if (q[j] < joints[j].lower || q[j] > joints[j].upper) return false;
  }
  return true;
}

VecX RobotModel::clampToLimits(const VecX& q) const {
  VecX out = q;
  for (int j = 0; j < dof(); ++j) out[j] = std::clamp(q[j], joints[j].lower, joints[j].upper);
  return out;
}

Frames forwardKinematics(const RobotModel& m, const Configuration& q) {
  if (q.joints.size() != m.dof())
    throw DimensionError("configuration has " + std::to_string(q.joints.size()) +
                         " joints, model has " + std::to_string(m.dof()));
  Frames f;
  f.links.reserve(m.linkCount());
  f.links.push_back(q.base);
  for (int j = 0; j < m.dof(); ++j) {
    const Joint& jt = m.joints[j];
    Transform t = f.links.back() * jt.origin;
    t.rotation = t.rotation * axisRotation(jt.axis, q.joints[j]);
    f.links.push_back(t);
  }
  f.effector = f.links.back() * m.effector_offset;
  f.stance = q.base * m.stance_offset;
  return f;
}

Jacobian6 jacobian(const RobotModel& m, const Frames& f) {
  Jacobian6 j(6, m.dof());
  const Vec3& pe = f.effector.translation;
  for (int k = 0; k < m.dof(); ++k) {
    const Transform& lk = f.links[k + 1];
    const Vec3 a = lk.rotation * m.joints[k].axis;
    j.block<3, 1>(0, k) = a.cross(pe - lk.translation);
    j.block<3, 1>(3, k) = a;
  }
  return j;
}

Jacobian6 jacobian(const RobotModel& m, const Configuration& q) {
  return jacobian(m, forwardKinematics(m, q));
}

double manipulability(const Jacobian6& j) {
  const Eigen::Matrix<double, 6, 6> jjt = j * j.transpose();
  const double det = jjt.determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

double manipulability(const RobotModel& m, const Configuration& q) {
  return manipulability(jacobian(m, q));
}

std::vector<WorldSphere> collisionSpheres(const RobotModel& m, const Frames& f) {
  std::vector<WorldSphere> out;
  out.reserve(m.sphereCount());
  for (int i = 0; i < m.linkCount(); ++i) {
    for (const auto& s : m.link(i).spheres) out.push_back({f.links[i].apply(s.center), s.radius, i});
  }
  return out;
}

std::vector<WorldSphere> collisionSpheres(const RobotModel& m, const Configuration& q) {
  return collisionSpheres(m, forwardKinematics(m, q));
}

bool selfCollisionFree(const RobotModel&, const std::vector<WorldSphere>& s) {
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      if (std::abs(s[a].link - s[b].link) <= 1) continue;
      const double r = s[a].radius + s[b].radius;
      if ((s[a].center - s[b].center).squaredNorm() < r * r) return false;
    }
  }
  return true;
}

bool selfCollisionFree(const RobotModel& m, const Configuration& q) {
  return selfCollisionFree(m, collisionSpheres(m, q));
}

Vec3 centerOfMass(const RobotModel& m, const Frames& f) {
  Vec3 c = Vec3::Zero();
  double total = 0.0;
  for (int i = 0; i < m.linkCount(); ++i) {
    const Link& l = m.link(i);
    c += l.mass * f.links[i].apply(l.com);
    total += l.mass;
  }
  return c / total;
}

bool comInStance(const RobotModel& m, const Frames& f, Eigen::Vector2d& out) {
  const Vec3 com = centerOfMass(m, f);
  const Vec3 n = f.stance.rotation.col(2);
  if (std::abs(n.z()) < 1e-9) return false;
  // Vertical line through the CoM meets the stance plane at com + t * e_z.
  const double t = -n.dot(com - f.stance.translation) / n.z();
  const Vec3 p = com + Vec3(0, 0, t);
  const Vec3 local = f.stance.rotation.transpose() * (p - f.stance.translation);
  out = local.head<2>();
  return true;
}

double polygonSignedDistance(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p,
                             Eigen::Vector2d* outward) {
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d best_closest = p;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    const Eigen::Vector2d e = b - a;
    if (cross2(e, p - a) < 0) inside = false;
    const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d c = a + t * e;
    const double d = (p - c).norm();
    if (d < best) {
      best = d;
      best_closest = c;
    }
  }
  if (outward != nullptr) {
    const Eigen::Vector2d diff = p - best_closest;
    const double n = diff.norm();
    *outward = n > 1e-15 ? Eigen::Vector2d(diff / n) : Eigen::Vector2d::Zero();
    if (inside) *outward = -*outward;
  }
  return inside ? -best : best;
}

bool balanced(const RobotModel& m, const Frames& f) {
  Eigen::Vector2d p;
  if (!comInStance(m, f, p)) return false;
  const auto& poly = m.support_polygon;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    if (cross2(b - a, p - a) < -1e-12) return false;
  }
  return true;
}

bool balanced(const RobotModel& m, const Configuration& q) {
  return balanced(m, forwardKinematics(m, q));
}

bool collidesWithEnvironment(const std::vector<WorldSphere>& spheres, const Environment& env) {
  for (const auto& o : env.obstacles) {
    for (const auto& s : spheres) {
      if (sphereIntersectsObstacle(Sphere{s.center, s.radius}, o)) return true;
    }
  }
  return false;
}

}  // namespace idrm
