#pragma once

#include <Eigen/Dense>

namespace emla {

using Eigen::Matrix3d;
using Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Component layout of every 6-vector in this library: the angular block
/// occupies rows [0,3), the linear block rows [3,6). Twists are stored as
/// (omega, v) and wrenches as (moment, force). All adjoints, Lie brackets,
/// inertia matrices and recursions below assume this ordering; algorithms and
/// tests must index through these offsets rather than hard-coding 0/3.
inline constexpr int kAngularOffset = 0;
inline constexpr int kLinearOffset = 3;

/// Instantaneous motion of a frame: angular velocity stacked over linear
/// velocity of the frame origin, both expressed in the same frame.
using Twist = Vector6d;

/// Generalized force: moment stacked over force, dual to Twist under the dot
/// product (power = wrench . twist).
using Wrench = Vector6d;

inline Twist make_twist(const Vector3d& angular, const Vector3d& linear) {
  Twist s;
  s.segment<3>(kAngularOffset) = angular;
  s.segment<3>(kLinearOffset) = linear;
  return s;
}

inline Eigen::VectorBlock<const Vector6d, 3> angular_part(const Vector6d& s) {
  return s.segment<3>(kAngularOffset);
}

inline Eigen::VectorBlock<const Vector6d, 3> linear_part(const Vector6d& s) {
  return s.segment<3>(kLinearOffset);
}

/// Skew-symmetric matrix such that skew(a) * b == a.cross(b).
Matrix3d skew(const Vector3d& v);

/// Rigid transform g = (R, t) acting on points as x -> R x + t.
struct Transform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();

  static Transform identity() { return Transform{}; }

  Vector3d apply(const Vector3d& point) const {
    return rotation * point + translation;
  }
};

/// Frobenius norm of R^T R - I; zero for an exact rotation.
double rotation_defect(const Matrix3d& rotation);

/// True when `rotation` is orthonormal within `tol` and has determinant +1.
bool is_rotation(const Matrix3d& rotation, double tol = 1e-9);

/// Nearest rotation in the Frobenius sense (polar factor via SVD).
Matrix3d orthonormalized(const Matrix3d& rotation);

/// Composition threshold above which the rotation factor is snapped back to
/// the orthonormal manifold. Keeps drift bounded over millions of products.
inline constexpr double kRotationDriftTol = 1e-10;

/// g_a then g_b, i.e. (g_a * g_b).apply(x) == g_a.apply(g_b.apply(x)).
/// Re-orthonormalizes the rotation factor when accumulated round-off exceeds
/// kRotationDriftTol.
Transform compose(const Transform& a, const Transform& b);

Transform inverse(const Transform& g);

/// Adjoint of g mapping twists between frames: with our (angular, linear)
/// layout Ad(g) = [[R, 0], [skew(t) R, R]].
Matrix6d adjoint(const Transform& g);

/// Lie bracket matrix of a twist s = (omega, v):
/// ad(s) = [[skew(omega), 0], [skew(v), skew(omega)]], so ad(s1) * s2 is the
/// bracket [s1, s2] and -ad(s)^T acts on wrenches.
Matrix6d ad(const Twist& s);

/// Exponential of a screw axis scaled by a joint displacement. The axis must
/// have a unit angular part (revolute) or a zero angular part (prismatic);
/// a non-unit angular part is handled by rescaling and remains exact.
Transform twist_exp(const Twist& axis, double displacement);

/// Rotation from roll-pitch-yaw angles: Rz(yaw) * Ry(pitch) * Rx(roll).
Matrix3d rotation_rpy(double roll, double pitch, double yaw);

}  // namespace emla
