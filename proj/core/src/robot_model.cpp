#include "emla_sens/robot_model.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <string>

#include "emla_sens/errors.hpp"
#include "emla_sens/log.hpp"

namespace emla {

namespace {

using nlohmann::json;

constexpr double kAxisNormTol = 1e-9;
constexpr double kSymmetryTol = 1e-9;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + " " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "is missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

Vector3d as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "must be an array of 3 numbers");
  Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Matrix3d as_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "must be a 3x3 array");
  Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const json& row = j[r];
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != 3) fail(row_path, "must be an array of 3 numbers");
    for (int c = 0; c < 3; ++c) {
      m(r, c) = as_number(row[c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Transform parse_transform(const json& j, const std::string& path) {
  Transform g;
  if (j.is_null()) return g;
  if (!j.is_object()) fail(path, "must be an object");
  if (j.contains("translation")) g.translation = as_vec3(j["translation"], path + ".translation");
  if (j.contains("rpy")) {
    const Vector3d rpy = as_vec3(j["rpy"], path + ".rpy");
    g.rotation = rotation_rpy(rpy.x(), rpy.y(), rpy.z());
  }
  if (j.contains("rotation")) {
    if (j.contains("rpy")) fail(path, "must not define both rpy and rotation");
    g.rotation = as_mat3(j["rotation"], path + ".rotation");
  }
  return g;
}

SpatialInertia parse_link(const json& j, const std::string& path) {
  const double mass = as_number(require(j, "mass", path), path + ".mass");
  Vector3d com = Vector3d::Zero();
  if (j.contains("com")) com = as_vec3(j["com"], path + ".com");
  Matrix3d inertia_com = Matrix3d::Zero();
  if (j.contains("inertia_about_com")) {
    inertia_com = as_mat3(j["inertia_about_com"], path + ".inertia_about_com");
  }
  if (j.contains("inertia_diag")) {
    if (j.contains("inertia_about_com")) {
      fail(path, "must not define both inertia_diag and inertia_about_com");
    }
    inertia_com = as_vec3(j["inertia_diag"], path + ".inertia_diag").asDiagonal();
  }
  return SpatialInertia::from_com(mass, com, inertia_com);
}

JointSpec parse_joint(const json& j, const std::string& path) {
  JointSpec joint;
  const json& name = require(j, "name", path);
  if (!name.is_string()) fail(path + ".name", "must be a string");
  joint.name = name.get<std::string>();

  const json& kind = require(j, "kind", path);
  if (!kind.is_string()) fail(path + ".kind", "must be a string");
  const std::string kind_s = kind.get<std::string>();
  if (kind_s == "revolute") {
    joint.kind = JointKind::revolute;
  } else if (kind_s == "prismatic") {
    joint.kind = JointKind::prismatic;
  } else {
    fail(path + ".kind", "must be 'revolute' or 'prismatic', got '" + kind_s + "'");
  }

  const json& axis = require(j, "axis", path);
  if (!axis.is_object()) fail(path + ".axis", "must be an object");
  Vector3d angular = Vector3d::Zero();
  Vector3d linear = Vector3d::Zero();
  if (axis.contains("angular")) angular = as_vec3(axis["angular"], path + ".axis.angular");
  if (axis.contains("linear")) linear = as_vec3(axis["linear"], path + ".axis.linear");
  joint.axis = make_twist(angular, linear);

  const json& limits = require(j, "limits", path);
  if (!limits.is_array() || limits.size() != 2) {
    fail(path + ".limits", "must be [lower, upper]");
  }
  joint.limit_lower = as_number(limits[0], path + ".limits[0]");
  joint.limit_upper = as_number(limits[1], path + ".limits[1]");

  if (j.contains("transmission") && !j["transmission"].is_null()) {
    const json& t = j["transmission"];
    const std::string tp = path + ".transmission";
    TransmissionSpec spec;
    spec.anchor_a = as_number(require(t, "anchor_a", tp), tp + ".anchor_a");
    spec.anchor_b = as_number(require(t, "anchor_b", tp), tp + ".anchor_b");
    spec.angle_offset = as_number(require(t, "angle_offset", tp), tp + ".angle_offset");
    joint.transmission = spec;
  }
  return joint;
}

void check_rotation(const Matrix3d& r, const std::string& path) {
  if (!is_rotation(r, 1e-8)) {
    fail(path, "rotation is not orthonormal with determinant +1");
  }
}

void check_inertia(const SpatialInertia& si, const std::string& path) {
  if (!(si.mass > 0.0) || !std::isfinite(si.mass)) fail(path + ".mass", "must be positive and finite");
  if (!si.first_moment.allFinite() || !si.inertia.allFinite()) {
    fail(path, "inertial parameters must be finite");
  }
  const double scale = std::max(1.0, si.inertia.norm());
  if ((si.inertia - si.inertia.transpose()).norm() > kSymmetryTol * scale) {
    fail(path + ".inertia", "must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(si.inertia);
  if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
    fail(path + ".inertia", "must be positive semidefinite");
  }
}

}  // namespace

Matrix6d SpatialInertia::matrix() const {
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d hx = skew(first_moment);
  m.block<3, 3>(kAngularOffset, kAngularOffset) = inertia;
  m.block<3, 3>(kAngularOffset, kLinearOffset) = hx;
  m.block<3, 3>(kLinearOffset, kAngularOffset) = hx.transpose();
  m.block<3, 3>(kLinearOffset, kLinearOffset) = mass * Matrix3d::Identity();
  return m;
}

SpatialInertia SpatialInertia::from_com(double mass, const Vector3d& com,
                                        const Matrix3d& inertia_about_com) {
  SpatialInertia si;
  si.mass = mass;
  si.first_moment = mass * com;
  si.inertia = inertia_about_com +
               mass * (com.squaredNorm() * Matrix3d::Identity() - com * com.transpose());
  return si;
}

SpatialInertia SpatialInertia::with_point_mass(double mass, const Vector3d& point) const {
  SpatialInertia out = *this;
  out.mass += mass;
  out.first_moment += mass * point;
  out.inertia +=
      mass * (point.squaredNorm() * Matrix3d::Identity() - point * point.transpose());
  return out;
}

SpatialInertia RobotModel::effective_inertia(int i) const {
  if (i < 0 || i >= dof()) {
    throw ValidationError("effective_inertia index " + std::to_string(i) + " out of range");
  }
  if (i == dof() - 1 && payload_mass != 0.0) {
    return link_inertias[i].with_point_mass(payload_mass, tcp_offset.translation);
  }
  return link_inertias[i];
}

void RobotModel::validate() const {
  const int n = dof();
  if (n < 1) throw ValidationError("robot.joints must contain at least one joint");
  if (static_cast<int>(parent_transforms.size()) != n) {
    throw ValidationError("robot.parent_transforms must have one entry per joint");
  }
  if (static_cast<int>(link_inertias.size()) != n) {
    throw ValidationError("robot.links must have one entry per joint");
  }
  if (initial_q.size() != n) {
    throw ValidationError("robot.initial_q must have one entry per joint");
  }
  if (!initial_q.allFinite()) throw ValidationError("robot.initial_q must be finite");
  if (!gravity.allFinite()) throw ValidationError("robot.gravity must be finite");
  if (!(payload_mass >= 0.0) || !std::isfinite(payload_mass)) {
    throw ValidationError("robot.payload_mass must be non-negative and finite");
  }
  check_rotation(tcp_offset.rotation, "robot.tcp_offset");
  if (!tcp_offset.translation.allFinite()) {
    throw ValidationError("robot.tcp_offset.translation must be finite");
  }

  std::set<std::string> names;
  for (int i = 0; i < n; ++i) {
    const JointSpec& j = joints[i];
    const std::string prefix =
        "robot.joints[" + std::to_string(i) + "] ('" + j.name + "')";
    if (j.name.empty()) fail(prefix, "has an empty name");
    if (!names.insert(j.name).second) fail(prefix, "duplicates another joint name");

    if (!j.axis.allFinite()) fail(prefix + ".axis", "must be finite");
    const double wn = Vector3d(angular_part(j.axis)).norm();
    const double vn = Vector3d(linear_part(j.axis)).norm();
    if (j.kind == JointKind::revolute) {
      if (std::abs(wn - 1.0) > kAxisNormTol) {
        fail(prefix + ".axis", "of a revolute joint must have a unit angular part");
      }
    } else {
      if (wn > kAxisNormTol) {
        fail(prefix + ".axis", "of a prismatic joint must have a zero angular part");
      }
      if (std::abs(vn - 1.0) > kAxisNormTol) {
        fail(prefix + ".axis", "of a prismatic joint must have a unit linear part");
      }
    }

    if (!std::isfinite(j.limit_lower) || !std::isfinite(j.limit_upper)) {
      fail(prefix + ".limits", "must be finite");
    }
    if (!(j.limit_lower < j.limit_upper)) {
      fail(prefix + ".limits", "must satisfy lower < upper");
    }

    check_rotation(parent_transforms[i].rotation, prefix + ".parent_transform");
    if (!parent_transforms[i].translation.allFinite()) {
      fail(prefix + ".parent_transform.translation", "must be finite");
    }
    check_inertia(link_inertias[i], prefix + ".link");

    if (j.transmission) {
      const TransmissionSpec& t = *j.transmission;
      if (j.kind != JointKind::revolute) {
        fail(prefix + ".transmission", "is only supported on revolute joints");
      }
      if (!(t.anchor_a > 0.0) || !(t.anchor_b > 0.0) ||
          !std::isfinite(t.anchor_a) || !std::isfinite(t.anchor_b) ||
          !std::isfinite(t.angle_offset)) {
        fail(prefix + ".transmission", "anchors must be positive and finite");
      }
      // The crank is at a dead center (dx/dtheta = 0) whenever the enclosed
      // angle is a multiple of pi; reject limit ranges that can reach one.
      const double lo = j.limit_lower + t.angle_offset;
      const double hi = j.limit_upper + t.angle_offset;
      const double k = std::ceil(lo / M_PI - 1e-12);
      if (k * M_PI <= hi + 1e-12) {
        fail(prefix + ".transmission",
             "reaches a dead-center pose (dx/dtheta = 0) inside the joint limits");
      }
    }
  }
}

RobotModel load_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("robot model is not valid JSON: ") + e.what());
  }
  const json& root =
      (doc.is_object() && doc.contains("robot") && doc["robot"].is_object())
          ? doc["robot"]
          : doc;

  RobotModel model;
  const json& joints = require(root, "joints", "robot");
  if (!joints.is_array() || joints.empty()) {
    fail("robot.joints", "must be a non-empty array");
  }
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string path = "robot.joints[" + std::to_string(i) + "]";
    const json& jj = joints[i];
    model.joints.push_back(parse_joint(jj, path));
    model.parent_transforms.push_back(
        parse_transform(jj.contains("parent_transform") ? jj["parent_transform"] : json(),
                        path + ".parent_transform"));
    model.link_inertias.push_back(parse_link(require(jj, "link", path), path + ".link"));
  }

  if (root.contains("tcp_offset")) {
    model.tcp_offset = parse_transform(root["tcp_offset"], "robot.tcp_offset");
  }
  if (root.contains("gravity")) {
    model.gravity = as_vec3(root["gravity"], "robot.gravity");
  }
  if (root.contains("payload_mass")) {
    model.payload_mass = as_number(root["payload_mass"], "robot.payload_mass");
  }
  const int n = model.dof();
  model.initial_q = Eigen::VectorXd::Zero(n);
  if (root.contains("initial_q")) {
    const json& q0 = root["initial_q"];
    if (!q0.is_array() || static_cast<int>(q0.size()) != n) {
      fail("robot.initial_q", "must be an array with one entry per joint");
    }
    for (int i = 0; i < n; ++i) {
      model.initial_q[i] = as_number(q0[i], "robot.initial_q[" + std::to_string(i) + "]");
    }
  }

  model.validate();
  for (int i = 0; i < n; ++i) {
    if (model.initial_q[i] < model.joints[i].limit_lower ||
        model.initial_q[i] > model.joints[i].limit_upper) {
      log_warn("robot.initial_q[" + std::to_string(i) + "] starts outside the limits of joint '" +
               model.joints[i].name + "'");
    }
  }
  return model;
}

RobotModel update_payload(const RobotModel& model, double mass) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) {
    throw ValidationError("payload mass must be non-negative and finite, got " +
                          std::to_string(mass));
  }
  RobotModel out = model;
  out.payload_mass = mass;
  return out;
}

ForwardKinematics forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q) {
  const int n = model.dof();
  if (q.size() != n) {
    throw ValidationError("forward_kinematics: q has size " + std::to_string(q.size()) +
                          ", expected " + std::to_string(n));
  }
  ForwardKinematics fk;
  fk.link_frames.resize(n);
  Transform g = Transform::identity();
  for (int i = 0; i < n; ++i) {
    g = compose(g, compose(model.parent_transforms[i], twist_exp(model.joints[i].axis, q[i])));
    fk.link_frames[i] = g;
  }
  fk.tcp = compose(g, model.tcp_offset);
  return fk;
}

TransmissionState transmission_map(const TransmissionSpec& t, double theta,
                                   double theta_dot, double torque) {
  const double phi = theta + t.angle_offset;
  const double ab = t.anchor_a * t.anchor_b;
  const double x2 =
      t.anchor_a * t.anchor_a + t.anchor_b * t.anchor_b - 2.0 * ab * std::cos(phi);
  const double x = std::sqrt(std::max(x2, 0.0));
  if (x <= 1e-12) {
    throw DivergenceError("crank transmission stroke collapsed to zero at theta=" +
                          std::to_string(theta));
  }
  const double gain = ab * std::sin(phi) / x;
  if (std::abs(gain) < kTransmissionGainTol) {
    throw DivergenceError(
        "crank transmission at a dead-center pose (|dx/dtheta| < 1e-9) at theta=" +
        std::to_string(theta));
  }
  TransmissionState s;
  s.position = x;
  s.gain = gain;
  s.velocity = gain * theta_dot;
  s.force = torque / gain;
  return s;
}

ActuatorPoint actuator_point(const JointSpec& joint, double theta, double theta_dot,
                             double theta_ddot, double torque) {
  ActuatorPoint p;
  if (!joint.transmission) {
    p.position = theta;
    p.velocity = theta_dot;
    p.acceleration = theta_ddot;
    p.force = torque;
    p.gain = 1.0;
    return p;
  }
  const TransmissionSpec& t = *joint.transmission;
  const TransmissionState s = transmission_map(t, theta, theta_dot, torque);
  const double phi = theta + t.angle_offset;
  const double ab = t.anchor_a * t.anchor_b;
  const double sp = ab * std::sin(phi);
  const double d2x = ab * std::cos(phi) / s.position -
                     sp * sp / (s.position * s.position * s.position);
  p.position = s.position;
  p.velocity = s.velocity;
  p.gain = s.gain;
  p.acceleration = d2x * theta_dot * theta_dot + s.gain * theta_ddot;
  p.force = s.force;
  return p;
}

}  // namespace emla
