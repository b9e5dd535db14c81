#pragma once

#include <vector>

#include "idrm/robot_model.hpp"

namespace idrm {

struct ConstraintSet {
  Transform target;  // effector pose in world
  double position_tolerance = 1e-4;
  double orientation_tolerance = 1e-3;
  /// Stance frame on the ground: z = 0, roll = 0, pitch = 0.
  bool stance_lock = false;
  double stance_tolerance = 1e-6;
  /// Base pose frozen at the seed's; only joints move.
  bool fixed_base = false;
  bool balance = false;
  bool self_collision = false;
};

struct IkOptions {
  int max_iterations = 200;
  double damping = 1e-3;  // scaled by min(1, task error)
  double max_step = 0.3;  // per-coordinate cap (rad or m)
  double nullspace_tolerance = 1e-6;
  /// CoM penalty activates this far inside the support polygon boundary.
  double balance_margin = 0.01;
  /// Give up after this many iterations without a 1% drop in task error.
  int stall_iterations = 30;
  /// Stop once the tasks have held this long even if the nominal pull is
  /// still blocked by an active inequality (joint limit or balance).
  int settle_iterations = 25;
};

struct IkResiduals {
  double position = 0.0;     // m
  double orientation = 0.0;  // rad
  double stance = 0.0;       // max of |z|, |roll|, |pitch|
  bool balanced = true;
  bool self_collision_free = true;
  bool within_limits = true;
};

struct IkResult {
  Configuration q;
  bool converged = false;
  int iterations = 0;
  IkResiduals residuals;
  /// Squared task error after each accepted iteration (non-increasing while
  /// the tasks are unsatisfied).
  std::vector<double> history;
};

/// Per-coordinate weights of ||q - q_nom||^2: entries 0-5 base (x, y, z,
/// rx, ry, rz), then one per joint.
VecX defaultIkWeights(const RobotModel& m);

/// Nominal-regularised whole-body IK: damped Gauss-Newton on the stacked task
/// residuals with the nominal pull projected into the task nullspace and joint
/// limits clamped every step. Convergence is re-verified from fresh forward
/// kinematics. An infeasible constraint set looks the same as a
/// non-converging one. Deterministic.
IkResult solveIk(const RobotModel& m, const Configuration& seed, const Configuration& nominal,
                 const ConstraintSet& c, const VecX& weights, const IkOptions& opt = {});

/// Residuals of `q` against `c`, computed from forward kinematics alone.
IkResiduals evaluateConstraints(const RobotModel& m, const Configuration& q, const ConstraintSet& c);
bool satisfies(const IkResiduals& r, const ConstraintSet& c);

}  // namespace idrm
