#include "idrm/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "idrm/error.hpp"

namespace idrm {

namespace {
constexpr double kGimbalMargin = 1e-6;
}

Mat3 rotationFromRpy(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  Mat3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

std::optional<Rpy> tryRpyOf(const Mat3& r) {
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(s);
  if (std::abs(pitch) >= M_PI / 2 - kGimbalMargin) return std::nullopt;
  return Rpy{std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0))};
}

Rpy rpyOf(const Mat3& r) {
  auto out = tryRpyOf(r);
  if (!out) throw GimbalLockError("rpy undefined: pitch at +-pi/2");
  return *out;
}

void rollPitchOf(const Mat3& r, double& roll, double& pitch) {
  pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double c = std::hypot(r(2, 1), r(2, 2));
  roll = c > 1e-12 ? std::atan2(r(2, 1), r(2, 2)) : 0.0;
}

Transform poseFromXyzRpy(const Vec3& xyz, const Rpy& rpy) {
  return {rotationFromRpy(rpy), xyz};
}

Mat3 rotZ(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 expSO3(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 k = skew(w);
  if (theta < 1e-8) return Mat3::Identity() + k + 0.5 * k * k;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 logSO3(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < 1e-6) return 0.5 * (1.0 + theta * theta / 6.0) * v;
  if (M_PI - theta > 1e-6) return theta / (2.0 * std::sin(theta)) * v;
  // Near pi: axis from the symmetric part.
  Mat3 b = (r + Mat3::Identity()) * 0.5;
  int k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(v) < 0) axis = -axis;
  return theta * axis;
}

double rotationDistance(const Mat3& a, const Mat3& b) {
  return logSO3(a * b.transpose()).norm();
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace idrm
