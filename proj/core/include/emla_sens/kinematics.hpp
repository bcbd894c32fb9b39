#pragma once

#include <vector>

#include "emla_sens/robot_model.hpp"
#include "emla_sens/trajectory.hpp"

namespace emla {

/// Tool-point position Jacobian (3 x n) with its time derivative, plus the
/// 6 x n spatial Jacobian pair they are reduced from. Column i of `spatial`
/// is the i-th joint axis expressed in the world frame; the task row block
/// follows by shifting the axis action to the tool point.
struct JacobianPair {
  Eigen::MatrixXd task;         // dr/dq, 3 x n
  Eigen::MatrixXd task_dot;     // d/dt (dr/dq), 3 x n
  Eigen::MatrixXd spatial;      // 6 x n
  Eigen::MatrixXd spatial_dot;  // 6 x n
  Vector3d tool_position = Vector3d::Zero();
  Vector3d tool_velocity = Vector3d::Zero();  // task * qdot
};

/// Jacobians at (q, qdot). The derivative blocks are linear in qdot.
JacobianPair get_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& qdot);

/// Relative singular-value cutoff of the undamped pseudoinverse: directions
/// below kPinvRelCutoff * sigma_max are treated as unreachable.
inline constexpr double kPinvRelCutoff = 1e-10;

/// Smallest task-space singular value at which the tracking step still runs
/// undamped; below it the step switches to damped least squares.
inline constexpr double kSingularSigmaTol = 1e-6;

/// Damping factor used once the singularity guard has tripped.
inline constexpr double kDampingLambda = 1e-4;

/// Tool position error at which trajectory integration aborts.
inline constexpr double kTrackingAbortError = 0.1;  // [m]

/// Moore-Penrose pseudoinverse (damping == 0), or the damped least-squares
/// right inverse J^T (J J^T + damping^2 I)^-1 (damping > 0). Both are
/// evaluated through the SVD, so the damped form stays finite at rank drops.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& j, double damping = 0.0);

/// One step of second-order inverse differential kinematics.
struct IkStepResult {
  Eigen::VectorXd q_next;     // q + qdot * dt
  Eigen::VectorXd qdot_next;  // qdot + qddot * dt
  Eigen::VectorXd qdot;       // joint rates realizing the reference velocity at q
  Eigen::VectorXd qddot;      // joint accelerations realizing the reference acceleration
  bool damped = false;        // singularity guard engaged at this state
};

/// Resolve the reference velocity and acceleration at (q, qdot_carried) and
/// advance one explicit Euler step of size dt. qdot_carried only enters the
/// Jacobian derivative; the returned qdot re-solves the velocity level.
IkStepResult ik_step(const RobotModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qdot_carried,
                     const TrajectoryPoint& ref, double dt);

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd q, qdot, qddot;
};

struct TrajectoryRun {
  std::vector<TrajectorySample> samples;
  double max_tracking_error = 0.0;  // [m]
  int damped_steps = 0;             // samples where the singularity guard held
  int limit_violations = 0;         // samples with some joint outside its limits
};

/// Integrate the differential IK across the whole horizon, sampling at
/// t_k = k dt from the model's initial configuration. `payload_mass`
/// replaces the model's payload for the run (the tool path itself does not
/// depend on it, but callers hand one model + mass pair per sweep point).
/// Throws DivergenceError when the tool position error exceeds
/// kTrackingAbortError.
TrajectoryRun run_trajectory(const RobotModel& model, const TrajectorySpec& traj,
                             double dt, double payload_mass);

}  // namespace emla
