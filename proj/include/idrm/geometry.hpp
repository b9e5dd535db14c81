#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

namespace idrm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform: x' = rotation * x + translation.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform Identity() { return {}; }
  static Transform FromTranslation(const Vec3& t) { return {Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 applyRotation(const Vec3& v) const { return rotation * v; }

  friend Transform operator*(const Transform& a, const Transform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  }

  bool operator==(const Transform&) const = default;
};

inline Transform compose(const Transform& a, const Transform& b) { return a * b; }

inline Transform invert(const Transform& a) {
  Mat3 rt = a.rotation.transpose();
  return {rt, -(rt * a.translation)};
}

struct Rpy {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotationFromRpy(double roll, double pitch, double yaw);
inline Mat3 rotationFromRpy(const Rpy& r) { return rotationFromRpy(r.roll, r.pitch, r.yaw); }

/// Inverse of rotationFromRpy. Throws GimbalLockError when |pitch| >= pi/2 - 1e-6.
Rpy rpyOf(const Mat3& r);
inline Rpy rpyOf(const Transform& t) { return rpyOf(t.rotation); }

/// Non-throwing variant; nullopt at the gimbal singularity.
std::optional<Rpy> tryRpyOf(const Mat3& r);

/// Roll and pitch only. Defined everywhere (pitch saturates at +-pi/2, roll is
/// taken as 0 there).
void rollPitchOf(const Mat3& r, double& roll, double& pitch);

Transform poseFromXyzRpy(const Vec3& xyz, const Rpy& rpy);

Mat3 rotZ(double a);
Mat3 skew(const Vec3& v);

/// SO(3) exponential and logarithm (axis-angle vector).
Mat3 expSO3(const Vec3& w);
Vec3 logSO3(const Mat3& r);

/// Geodesic angle between two rotations.
double rotationDistance(const Mat3& a, const Mat3& b);

/// Project onto SO(3) (nearest rotation, via SVD).
Mat3 orthonormalize(const Mat3& r);

}  // namespace idrm
