#include "idrm/ik.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "idrm/error.hpp"

namespace idrm {

namespace {

// Solver-side tolerances are tighter than the verified ones so that the
// post-hoc check never flips on round-off.
constexpr double kInnerTolScale = 0.5;

struct TaskSystem {
  VecX e;
  MatX a;
  double err = 0.0;
  bool tasks_ok = false;
};

class GaussNewton {
 public:
  GaussNewton(const RobotModel& m, const Configuration& nominal, const ConstraintSet& c,
              const VecX& weights, const IkOptions& opt)
      : m_(m), nominal_(nominal), c_(c), opt_(opt), fixed_(c.fixed_base) {
    n_ = m.dof() + (fixed_ ? 0 : 6);
    offset_ = fixed_ ? 0 : 6;
    winv_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const double w = weights[fixed_ ? i + 6 : i];
      winv_[i] = 1.0 / std::max(w, 1e-6);
    }
  }

  void build(const Configuration& q, TaskSystem& ts) const {
    const Frames f = forwardKinematics(m_, q);
    const bool stance_rows = c_.stance_lock && !fixed_;

    Eigen::Vector2d com_xy;
    double dist = 0.0;
    Eigen::Vector2d outward = Eigen::Vector2d::Zero();
    bool balance_row = false;
    if (c_.balance && comInStance(m_, f, com_xy)) {
      dist = polygonSignedDistance(m_.support_polygon, com_xy, &outward);
      balance_row = dist + opt_.balance_margin > 0.0;
    }

    const int rows = 6 + (stance_rows ? 3 : 0) + (balance_row ? 1 : 0);
    ts.e.setZero(rows);
    ts.a.setZero(rows, n_);

    const Vec3& pe = f.effector.translation;
    const Vec3& tb = q.base.translation;
    ts.e.head<3>() = c_.target.translation - pe;
    ts.e.segment<3>(3) = logSO3(c_.target.rotation * f.effector.rotation.transpose());
    ts.a.block(0, offset_, 6, m_.dof()) = jacobian(m_, f);
    if (!fixed_) {
      ts.a.block<3, 3>(0, 0).setIdentity();
      ts.a.block<3, 3>(0, 3) = -skew(pe - tb);
      ts.a.block<3, 3>(3, 3).setIdentity();
    }

    int row = 6;
    double stance_err = 0.0;
    if (stance_rows) {
      const Vec3& s = f.stance.translation;
      const Vec3 u = f.stance.rotation.col(2);
      ts.e[row] = -s.z();
      ts.e[row + 1] = -u.x();
      ts.e[row + 2] = -u.y();
      ts.a(row, 2) = 1.0;
      ts.a.block<1, 3>(row, 3) = (-skew(s - tb)).row(2);
      const Mat3 du = -skew(u);
      ts.a.block<1, 3>(row + 1, 3) = du.row(0);
      ts.a.block<1, 3>(row + 2, 3) = du.row(1);
      stance_err = std::max({std::abs(s.z()), std::abs(u.x()), std::abs(u.y())});
      row += 3;
    }

    if (balance_row) {
      ts.e[row] = -(dist + 1.5 * opt_.balance_margin);
      const Eigen::Matrix<double, 3, Eigen::Dynamic> jc = comJacobian(q, f);
      const Mat3 rs_t = f.stance.rotation.transpose();
      const Eigen::Matrix<double, 3, Eigen::Dynamic> local = rs_t * jc;
      ts.a.row(row) = outward.x() * local.row(0) + outward.y() * local.row(1);
    }

    ts.err = ts.e.squaredNorm();
    ts.tasks_ok = ts.e.head<3>().norm() < kInnerTolScale * c_.position_tolerance &&
                  ts.e.segment<3>(3).norm() < kInnerTolScale * c_.orientation_tolerance &&
                  (!stance_rows || stance_err < kInnerTolScale * c_.stance_tolerance) &&
                  (!c_.balance || dist <= 0.0);
  }

  /// d/dq of (CoM - stance point), world coordinates.
  Eigen::Matrix<double, 3, Eigen::Dynamic> comJacobian(const Configuration& q, const Frames& f) const {
    Eigen::Matrix<double, 3, Eigen::Dynamic> j = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n_);
    const double total = m_.totalMass();
    const Vec3 com = centerOfMass(m_, f);
    if (!fixed_) {
      // Base motion moves CoM and stance point rigidly together: only the
      // rotational part changes their difference.
      j.block<3, 3>(0, 3) = -skew(com - f.stance.translation);
    }
    // Suffix sums of mass and mass-weighted link CoMs.
    Vec3 weighted = Vec3::Zero();
    double mass = 0.0;
    for (int k = m_.dof() - 1; k >= 0; --k) {
      const Link& l = m_.links[k];
      weighted += l.mass * f.links[k + 1].apply(l.com);
      mass += l.mass;
      const Vec3 a = f.links[k + 1].rotation * m_.joints[k].axis;
      j.col(offset_ + k) = a.cross(weighted - mass * f.links[k + 1].translation) / total;
    }
    (void)q;
    return j;
  }

  VecX nominalPull(const Configuration& q) const {
    VecX d(n_);
    if (!fixed_) {
      d.head<3>() = nominal_.base.translation - q.base.translation;
      d.segment<3>(3) = logSO3(nominal_.base.rotation * q.base.rotation.transpose());
    }
    d.tail(m_.dof()) = nominal_.joints - q.joints;
    return d;
  }

  VecX step(const Configuration& q, const TaskSystem& ts) const {
    VecX winv = winv_;
    VecX pull = nominalPull(q);
    VecX delta;
    for (int pass = 0; pass < 2; ++pass) {
      delta = solveWeighted(ts, winv, pull);
      bool changed = false;
      for (int k = 0; k < m_.dof(); ++k) {
        const int i = offset_ + k;
        if (winv[i] == 0.0) continue;
        const bool at_lo = q.joints[k] <= m_.joints[k].lower && delta[i] < 0.0;
        const bool at_hi = q.joints[k] >= m_.joints[k].upper && delta[i] > 0.0;
        if (at_lo || at_hi) {
          winv[i] = 0.0;
          pull[i] = 0.0;
          changed = true;
        }
      }
      if (!changed) break;
    }
    return delta;
  }

  VecX solveWeighted(const TaskSystem& ts, const VecX& winv, const VecX& pull) const {
    const MatX aw = ts.a * winv.asDiagonal();
    MatX s = aw * ts.a.transpose();
    // Damping shrinks with the residual; a fixed one leaves an O(damping)
    // bias against the nominal pull at convergence.
    s.diagonal().array() += opt_.damping * std::min(1.0, std::sqrt(ts.err)) + 1e-14;
    const VecX y = s.ldlt().solve(ts.e - ts.a * pull);
    return pull + aw.transpose() * y;
  }

  Configuration retract(const Configuration& q, const VecX& delta, double scale) const {
    Configuration out = q;
    if (!fixed_) {
      out.base.translation += scale * delta.head<3>();
      out.base.rotation = expSO3(scale * delta.segment<3>(3)) * q.base.rotation;
    }
    out.joints = m_.clampToLimits(q.joints + scale * delta.tail(m_.dof()));
    return out;
  }

  int n() const { return n_; }

 private:
  const RobotModel& m_;
  const Configuration& nominal_;
  const ConstraintSet& c_;
  const IkOptions& opt_;
  bool fixed_;
  int n_ = 0;
  int offset_ = 0;
  VecX winv_;
};

}  // namespace

VecX defaultIkWeights(const RobotModel& m) { return VecX::Ones(m.dof() + 6); }

IkResiduals evaluateConstraints(const RobotModel& m, const Configuration& q, const ConstraintSet& c) {
  const Frames f = forwardKinematics(m, q);
  IkResiduals r;
  r.position = (f.effector.translation - c.target.translation).norm();
  r.orientation = rotationDistance(f.effector.rotation, c.target.rotation);
  double roll = 0.0, pitch = 0.0;
  rollPitchOf(f.stance.rotation, roll, pitch);
  r.stance = std::max({std::abs(f.stance.translation.z()), std::abs(roll), std::abs(pitch)});
  r.balanced = balanced(m, f);
  r.self_collision_free = selfCollisionFree(m, collisionSpheres(m, f));
  r.within_limits = m.withinLimits(q.joints);
  return r;
}

bool satisfies(const IkResiduals& r, const ConstraintSet& c) {
  return r.position < c.position_tolerance && r.orientation < c.orientation_tolerance &&
         (!c.stance_lock || r.stance <= c.stance_tolerance) && (!c.balance || r.balanced) &&
         (!c.self_collision || r.self_collision_free) && r.within_limits;
}

IkResult solveIk(const RobotModel& m, const Configuration& seed, const Configuration& nominal,
                 const ConstraintSet& c, const VecX& weights, const IkOptions& opt) {
  if (seed.joints.size() != m.dof() || nominal.joints.size() != m.dof())
    throw DimensionError("IK seed/nominal dimension does not match the model");
  if (weights.size() != m.dof() + 6) throw DimensionError("IK weights must have N + 6 entries");

  GaussNewton gn(m, nominal, c, weights, opt);
  IkResult res;
  res.q = seed;
  res.q.joints = m.clampToLimits(seed.joints);

  TaskSystem ts;
  gn.build(res.q, ts);
  double best = ts.err;
  int since_best = 0;
  int settled = 0;

  for (int it = 0; it < opt.max_iterations; ++it) {
    VecX delta = gn.step(res.q, ts);
    const double inf = delta.cwiseAbs().maxCoeff();
    if (ts.tasks_ok && inf < opt.nullspace_tolerance) break;
    if (ts.tasks_ok && ++settled >= opt.settle_iterations) break;
    if (!ts.tasks_ok) settled = 0;
    if (inf > opt.max_step) delta *= opt.max_step / inf;

    // Backtrack until the task error does not grow (or the tasks still hold).
    bool accepted = false;
    TaskSystem trial;
    Configuration next;
    double scale = 1.0;
    for (int k = 0; k < 10; ++k, scale *= 0.5) {
      next = gn.retract(res.q, delta, scale);
      gn.build(next, trial);
      if (trial.err <= ts.err || (ts.tasks_ok && trial.tasks_ok)) {
        accepted = true;
        break;
      }
    }
    res.iterations = it + 1;
    if (!accepted) break;
    res.q = std::move(next);
    ts = std::move(trial);
    res.history.push_back(ts.err);

    if (ts.err < 0.99 * best) {
      best = ts.err;
      since_best = 0;
    } else if (!ts.tasks_ok && ++since_best > opt.stall_iterations) {
      break;
    }
  }

  res.residuals = evaluateConstraints(m, res.q, c);
  res.converged = satisfies(res.residuals, c);
  return res;
}

}  // namespace idrm
