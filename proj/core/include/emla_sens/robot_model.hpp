#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emla_sens/spatial.hpp"

namespace emla {

enum class JointKind { revolute, prismatic };

/// Inertial properties of one rigid body, expressed in its own link frame.
/// `inertia` is the rotational inertia about the frame origin (not the center
/// of mass); `first_moment` is mass * com. Stored this way the parameters are
/// exactly linear in any point mass added to the body.
struct SpatialInertia {
  double mass = 0.0;
  Vector3d first_moment = Vector3d::Zero();
  Matrix3d inertia = Matrix3d::Zero();

  Vector3d com() const { return first_moment / mass; }

  /// 6x6 inertia acting on twists (angular, linear):
  /// [[inertia, skew(h)], [skew(h)^T, mass * I]] with h = first_moment.
  Matrix6d matrix() const;

  /// Build from the usual description: inertia tensor about the center of
  /// mass, shifted to the frame origin by the parallel-axis theorem.
  static SpatialInertia from_com(double mass, const Vector3d& com,
                                 const Matrix3d& inertia_about_com);

  /// This body plus a point mass rigidly attached at `point`.
  SpatialInertia with_point_mass(double mass, const Vector3d& point) const;
};

/// Crank linkage converting a revolute joint angle theta into linear actuator
/// stroke: x = sqrt(a^2 + b^2 - 2 a b cos(theta + theta0)), the third side of
/// a triangle whose other sides a, b enclose the angle theta + theta0.
struct TransmissionSpec {
  double anchor_a = 0.0;     // a, pivot-to-mount distance [m]
  double anchor_b = 0.0;     // b, pivot-to-rod-end distance [m]
  double angle_offset = 0.0; // theta0, enclosed angle at theta = 0 [rad]
};

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::revolute;
  /// Screw axis in the local link frame. Unit angular part for revolute
  /// joints, zero angular / unit linear part for prismatic joints.
  Twist axis = Twist::Zero();
  double limit_lower = 0.0;
  double limit_upper = 0.0;
  /// Engaged crank linkage, or nullopt for a direct drive (x = theta).
  std::optional<TransmissionSpec> transmission;
};

/// Serial-chain model. Frame i is attached to link i; parent_transforms[i]
/// places frame i relative to frame i-1 (world for i = 0) at q_i = 0, so the
/// world pose of frame i is the running product of
/// parent_transforms[k] * exp(axis_k * q_k) for k <= i.
struct RobotModel {
  std::vector<JointSpec> joints;
  std::vector<Transform> parent_transforms;
  std::vector<SpatialInertia> link_inertias;  // bare links, payload excluded
  Transform tcp_offset;                       // last link frame -> tool point
  Vector3d gravity = Vector3d(0.0, 0.0, -9.81);
  double payload_mass = 0.0;  // point mass carried at the tool point [kg]
  Eigen::VectorXd initial_q;

  int dof() const { return static_cast<int>(joints.size()); }

  /// Inertia of link i as seen by the dynamics: the bare link, plus the
  /// payload folded into the last link at the tool point.
  SpatialInertia effective_inertia(int i) const;

  /// Structural checks; throws ValidationError naming the offending field.
  void validate() const;
};

/// Parse a model from JSON text (either the model object itself or a wrapper
/// holding it under "robot"). Throws ValidationError with the path of any
/// missing or malformed field. The result has been validated.
RobotModel load_model(const std::string& json_text);

/// Copy of `model` carrying `mass` as the tool-point payload. Only the
/// payload field changes, so reapplying the previous value restores the
/// original model exactly.
RobotModel update_payload(const RobotModel& model, double mass);

struct ForwardKinematics {
  std::vector<Transform> link_frames;  // world pose of each link frame
  Transform tcp;                       // world pose of the tool point
};

ForwardKinematics forward_kinematics(const RobotModel& model,
                                     const Eigen::VectorXd& q);

/// Stroke-side state of a crank transmission at one instant.
struct TransmissionState {
  double position = 0.0;  // x [m]
  double gain = 0.0;      // dx/dtheta [m/rad]
  double velocity = 0.0;  // x_dot [m/s]
  double force = 0.0;     // rod force balancing `torque` [N]
};

/// Gain magnitude below which a crank pose counts as a dead center: the
/// linkage can no longer transmit force there and the stroke-side force is
/// unbounded.
inline constexpr double kTransmissionGainTol = 1e-9;

/// Evaluate the crank map at (theta, theta_dot) carrying joint torque
/// `torque`. Velocity and force follow from the gain: x_dot = gain *
/// theta_dot and force = torque / gain, which preserves power exactly.
/// Throws DivergenceError when |gain| falls below kTransmissionGainTol.
TransmissionState transmission_map(const TransmissionSpec& t, double theta,
                                   double theta_dot, double torque);

/// Stroke-side state extended with acceleration, for any joint drive.
struct ActuatorPoint {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double force = 0.0;
  double gain = 0.0;
};

/// transmission_map for an arbitrary joint: the crank linkage when one is
/// engaged, the identity map for a direct drive; adds the chain-rule stroke
/// acceleration x_ddot = d2x/dtheta2 * theta_dot^2 + dx/dtheta * theta_ddot.
ActuatorPoint actuator_point(const JointSpec& joint, double theta,
                             double theta_dot, double theta_ddot,
                             double torque);

}  // namespace emla
