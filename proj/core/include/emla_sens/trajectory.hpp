#pragma once

#include <optional>

#include "emla_sens/spatial.hpp"

namespace emla {

enum class TrajectoryKind { spiral, constant, linear };

struct WorkspaceBounds {
  Vector3d lower = Vector3d::Zero();
  Vector3d upper = Vector3d::Zero();
};

/// Closed-form Cartesian reference path for the tool point.
///
/// spiral:   x(t) = center + ((r0 + r1 t) cos(omega t),
///                            (r0 + r1 t) sin(omega t),
///                            z0 + k_z t)
/// linear:   the spiral with omega = 0, i.e. a straight line
///           center + (r0 + r1 t, 0, z0 + k_z t)
/// constant: the spiral frozen at t = 0, center + (r0, 0, z0)
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::spiral;
  Vector3d center = Vector3d::Zero();
  double r0 = 0.0;       // initial radius [m]
  double r1 = 0.0;       // radial growth rate [m/s]
  double omega = 0.0;    // angular rate [rad/s]
  double z0 = 0.0;       // initial height offset [m]
  double k_z = 0.0;      // climb rate [m/s]
  double duration = 0.0; // time horizon [s]
  std::optional<WorkspaceBounds> workspace;
};

struct TrajectoryPoint {
  Vector3d position = Vector3d::Zero();
  Vector3d velocity = Vector3d::Zero();
  Vector3d acceleration = Vector3d::Zero();
};

/// Analytic reference state at time t. Throws ValidationError when t lies
/// outside [0, duration] (with a 1e-9 slack for accumulated grid round-off).
TrajectoryPoint evaluate(const TrajectorySpec& spec, double t);

/// Number of samples laid on [0, duration] with step dt: floor(duration / dt)
/// whole steps plus the initial sample. A zero-length horizon yields a single
/// sample. Throws ValidationError for dt <= 0.
int sample_count(double duration, double dt);

/// Structural checks (finite fields, non-negative duration, ordered workspace
/// bounds). Throws ValidationError naming the offending field.
void validate(const TrajectorySpec& spec);

/// True when p lies inside the axis-aligned box (inclusive).
bool contains(const WorkspaceBounds& bounds, const Vector3d& p);

}  // namespace emla
