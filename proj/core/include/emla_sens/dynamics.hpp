#pragma once

#include <vector>

#include "emla_sens/robot_model.hpp"

namespace emla {

/// Inverse dynamics of a state triple: the generalized joint efforts (torque
/// for revolute joints, force for prismatic ones) plus the body-frame link
/// states they were assembled from. Gravity is folded in as an equivalent
/// base acceleration, so link_acceleration holds the gravity-offset values
/// used by the backward pass, not the coordinate acceleration of the links.
struct RneaResult {
  Eigen::VectorXd joint_effort;
  std::vector<Twist> link_velocity;      // V_i, in link frame i
  std::vector<Twist> link_acceleration;  // A_i with the gravity offset, in frame i
  std::vector<Wrench> link_wrench;       // wrench transmitted onto link i
};

/// Recursive Newton-Euler inverse dynamics over the serial chain, using the
/// model's effective link inertias (payload folded into the last link).
/// No external tool wrench is applied.
RneaResult rnea(const RobotModel& model, const Eigen::VectorXd& q,
                const Eigen::VectorXd& qdot, const Eigen::VectorXd& qddot);

}  // namespace emla
