#include "emla_sens/dynamics.hpp"

#include <string>

#include "emla_sens/errors.hpp"

namespace emla {

RneaResult rnea(const RobotModel& model, const Eigen::VectorXd& q,
                const Eigen::VectorXd& qdot, const Eigen::VectorXd& qddot) {
  const int n = model.dof();
  if (q.size() != n || qdot.size() != n || qddot.size() != n) {
    throw ValidationError("rnea: state vectors must all have size " + std::to_string(n));
  }

  RneaResult out;
  out.joint_effort.resize(n);
  out.link_velocity.resize(n);
  out.link_acceleration.resize(n);
  out.link_wrench.resize(n);

  // Forward sweep: propagate twist and accessory acceleration from the base
  // out to the tip, expressing everything in the local link frame. X_i maps
  // frame i-1 quantities into frame i.
  std::vector<Matrix6d> x(n);
  Twist v_prev = Twist::Zero();
  // Accelerating the base opposite to gravity is equivalent to the field.
  Twist a_prev = make_twist(Vector3d::Zero(), -model.gravity);

  for (int i = 0; i < n; ++i) {
    const Twist& s = model.joints[i].axis;
    const Transform local =
        compose(model.parent_transforms[i], twist_exp(s, q[i]));
    x[i] = adjoint(inverse(local));

    const Twist v = x[i] * v_prev + s * qdot[i];
    const Twist a = x[i] * a_prev + s * qddot[i] + ad(v) * s * qdot[i];
    out.link_velocity[i] = v;
    out.link_acceleration[i] = a;
    v_prev = v;
    a_prev = a;
  }

  // Backward sweep: accumulate the wrench each link passes to its parent and
  // project it on the joint axis.
  Wrench f_next = Wrench::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const Matrix6d g_i = model.effective_inertia(i).matrix();
    const Twist& v = out.link_velocity[i];
    Wrench f = g_i * out.link_acceleration[i] - ad(v).transpose() * (g_i * v);
    if (i + 1 < n) f += x[i + 1].transpose() * f_next;
    out.link_wrench[i] = f;
    out.joint_effort[i] = model.joints[i].axis.dot(f);
    f_next = f;
  }
  return out;
}

}  // namespace emla
