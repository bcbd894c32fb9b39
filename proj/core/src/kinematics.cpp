#include "emla_sens/kinematics.hpp"

#include <cmath>
#include <string>

#include "emla_sens/errors.hpp"
#include "emla_sens/log.hpp"

namespace emla {

namespace {

void check_state_size(const RobotModel& model, const Eigen::VectorXd& v,
                      const char* what) {
  if (v.size() != model.dof()) {
    throw ValidationError(std::string(what) + " has size " + std::to_string(v.size()) +
                          ", expected " + std::to_string(model.dof()));
  }
}

}  // namespace

JacobianPair get_jacobian(const RobotModel& model, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& qdot) {
  check_state_size(model, q, "q");
  check_state_size(model, qdot, "qdot");
  const int n = model.dof();

  JacobianPair out;
  out.spatial.setZero(6, n);
  out.spatial_dot.setZero(6, n);

  // Running world pose of link frame i together with its adjoint and the
  // adjoint's time derivative:
  //   Ad_i    = Ad_{i-1} Ad(local_i)
  //   dAd_i   = dAd_{i-1} Ad(local_i) + Ad_i ad(axis_i) qdot_i
  // where local_i = parent_i * exp(axis_i q_i) is the only factor that moves.
  Transform g = Transform::identity();
  Matrix6d ad_g = Matrix6d::Identity();
  Matrix6d ad_g_dot = Matrix6d::Zero();

  for (int i = 0; i < n; ++i) {
    const Transform local =
        compose(model.parent_transforms[i], twist_exp(model.joints[i].axis, q[i]));
    g = compose(g, local);
    const Matrix6d ad_local = adjoint(local);
    const Matrix6d ad_new = ad_g * ad_local;
    ad_g_dot = ad_g_dot * ad_local + ad_new * ad(model.joints[i].axis) * qdot[i];
    ad_g = ad_new;

    out.spatial.col(i) = ad_g * model.joints[i].axis;
    out.spatial_dot.col(i) = ad_g_dot * model.joints[i].axis;
  }

  const Vector3d r = compose(g, model.tcp_offset).translation;
  const Matrix3d rx = skew(r);
  const auto ang = out.spatial.topRows<3>();
  const auto lin = out.spatial.bottomRows<3>();

  // A spatial column (w, v) moves the point at r with velocity v + w x r.
  out.task = lin - rx * ang;
  out.tool_position = r;
  out.tool_velocity = out.task * qdot;
  out.task_dot = out.spatial_dot.bottomRows<3>() - rx * out.spatial_dot.topRows<3>() -
                 skew(out.tool_velocity) * ang;
  return out;
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& j, double damping) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;

  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i) {
    if (damping > 0.0) {
      inv[i] = sigma[i] / (sigma[i] * sigma[i] + damping * damping);
    } else if (sigma[i] > kPinvRelCutoff * sigma_max) {
      inv[i] = 1.0 / sigma[i];
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

IkStepResult ik_step(const RobotModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qdot_carried,
                     const TrajectoryPoint& ref, double dt) {
  const JacobianPair jac = get_jacobian(model, q, qdot_carried);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac.task);
  const double sigma_min = svd.singularValues().tail<1>()[0];

  IkStepResult out;
  out.damped = sigma_min < kSingularSigmaTol;
  if (out.damped) {
    warn_once("ik-singular",
              "task Jacobian near singular (sigma_min < 1e-6); continuing with "
              "damped least squares");
  }
  const Eigen::MatrixXd pinv =
      pseudoinverse(jac.task, out.damped ? kDampingLambda : 0.0);

  out.qdot = pinv * ref.velocity;
  out.qddot = pinv * (ref.acceleration - jac.task_dot * out.qdot);
  out.q_next = q + out.qdot * dt;
  out.qdot_next = out.qdot + out.qddot * dt;
  return out;
}

TrajectoryRun run_trajectory(const RobotModel& model, const TrajectorySpec& traj,
                             double dt, double payload_mass) {
  model.validate();
  validate(traj);
  const RobotModel carrying = update_payload(model, payload_mass);
  const int n_samples = sample_count(traj.duration, dt);
  const int n = carrying.dof();

  TrajectoryRun run;
  run.samples.reserve(n_samples);

  Eigen::VectorXd q = carrying.initial_q;
  Eigen::VectorXd qdot = Eigen::VectorXd::Zero(n);

  for (int k = 0; k < n_samples; ++k) {
    const double t = k * dt;
    const TrajectoryPoint ref = evaluate(traj, t);

    const ForwardKinematics fk = forward_kinematics(carrying, q);
    const double err = (fk.tcp.translation - ref.position).norm();
    run.max_tracking_error = std::max(run.max_tracking_error, err);
    if (err > kTrackingAbortError) {
      throw DivergenceError("tool position diverged from the reference at t=" +
                            std::to_string(t) + " (error " + std::to_string(err) +
                            " m, payload " + std::to_string(payload_mass) + " kg)");
    }
    if (traj.workspace && !contains(*traj.workspace, ref.position)) {
      warn_once("trajectory-workspace", "reference point left the workspace bounds at t=" +
                                            std::to_string(t));
    }

    const IkStepResult step = ik_step(carrying, q, qdot, ref, dt);
    if (step.damped) ++run.damped_steps;

    bool outside = false;
    for (int i = 0; i < n; ++i) {
      if (q[i] < carrying.joints[i].limit_lower || q[i] > carrying.joints[i].limit_upper) {
        outside = true;
        warn_once("joint-limit-" + carrying.joints[i].name,
                  "joint '" + carrying.joints[i].name + "' left its limits at t=" +
                      std::to_string(t));
      }
    }
    if (outside) ++run.limit_violations;

    TrajectorySample sample;
    sample.t = t;
    sample.q = q;
    sample.qdot = step.qdot;
    sample.qddot = step.qddot;
    run.samples.push_back(std::move(sample));

    q = step.q_next;
    qdot = step.qdot_next;
  }
  return run;
}

}  // namespace emla
