#include "emla_sens/spatial.hpp"

#include <cmath>

namespace emla {

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

double rotation_defect(const Matrix3d& rotation) {
  return (rotation.transpose() * rotation - Matrix3d::Identity()).norm();
}

bool is_rotation(const Matrix3d& rotation, double tol) {
  return rotation_defect(rotation) <= tol && rotation.determinant() > 0.0;
}

Matrix3d orthonormalized(const Matrix3d& rotation) {
  Eigen::JacobiSVD<Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d u = svd.matrixU();
  const Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

Transform compose(const Transform& a, const Transform& b) {
  Transform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (rotation_defect(out.rotation) > kRotationDriftTol) {
    out.rotation = orthonormalized(out.rotation);
  }
  return out;
}

Transform inverse(const Transform& g) {
  Transform out;
  out.rotation = g.rotation.transpose();
  out.translation = -(out.rotation * g.translation);
  return out;
}

Matrix6d adjoint(const Transform& g) {
  Matrix6d m = Matrix6d::Zero();
  m.block<3, 3>(kAngularOffset, kAngularOffset) = g.rotation;
  m.block<3, 3>(kLinearOffset, kAngularOffset) = skew(g.translation) * g.rotation;
  m.block<3, 3>(kLinearOffset, kLinearOffset) = g.rotation;
  return m;
}

Matrix6d ad(const Twist& s) {
  const Matrix3d wx = skew(angular_part(s));
  Matrix6d m = Matrix6d::Zero();
  m.block<3, 3>(kAngularOffset, kAngularOffset) = wx;
  m.block<3, 3>(kLinearOffset, kAngularOffset) = skew(linear_part(s));
  m.block<3, 3>(kLinearOffset, kLinearOffset) = wx;
  return m;
}

Transform twist_exp(const Twist& axis, double displacement) {
  const Vector3d omega = angular_part(axis);
  const Vector3d vel = linear_part(axis);
  const double omega_norm = omega.norm();

  Transform out;
  if (omega_norm < 1e-12) {
    out.translation = vel * displacement;
    return out;
  }

  const Vector3d unit = omega / omega_norm;
  const double theta = displacement * omega_norm;
  const Matrix3d wx = skew(unit);
  const Matrix3d wx2 = wx * wx;
  const double s = std::sin(theta);
  const double c = std::cos(theta);

  out.rotation = Matrix3d::Identity() + s * wx + (1.0 - c) * wx2;
  out.translation =
      (theta * Matrix3d::Identity() + (1.0 - c) * wx + (theta - s) * wx2) *
      (vel / omega_norm);
  return out;
}

Matrix3d rotation_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace emla
