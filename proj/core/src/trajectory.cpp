#include "emla_sens/trajectory.hpp"

#include <cmath>
#include <string>

#include "emla_sens/errors.hpp"

namespace emla {

namespace {

void check_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string("trajectory.") + field + " must be finite");
  }
}

TrajectoryPoint eval_spiral(const TrajectorySpec& s, double t) {
  const double r = s.r0 + s.r1 * t;
  const double phase = s.omega * t;
  const double c = std::cos(phase);
  const double sn = std::sin(phase);
  const double w = s.omega;

  TrajectoryPoint p;
  p.position = s.center + Vector3d(r * c, r * sn, s.z0 + s.k_z * t);
  p.velocity = Vector3d(s.r1 * c - r * w * sn, s.r1 * sn + r * w * c, s.k_z);
  p.acceleration = Vector3d(-2.0 * s.r1 * w * sn - r * w * w * c,
                            2.0 * s.r1 * w * c - r * w * w * sn, 0.0);
  return p;
}

}  // namespace

TrajectoryPoint evaluate(const TrajectorySpec& spec, double t) {
  constexpr double slack = 1e-9;
  if (t < -slack || t > spec.duration + slack) {
    throw ValidationError("trajectory evaluated at t=" + std::to_string(t) +
                          " outside [0, " + std::to_string(spec.duration) + "]");
  }
  switch (spec.kind) {
    case TrajectoryKind::spiral:
      return eval_spiral(spec, t);
    case TrajectoryKind::linear: {
      TrajectorySpec line = spec;
      line.omega = 0.0;
      return eval_spiral(line, t);
    }
    case TrajectoryKind::constant: {
      TrajectoryPoint p;
      p.position = spec.center + Vector3d(spec.r0, 0.0, spec.z0);
      return p;
    }
  }
  throw ValidationError("trajectory.kind is not a known kind");
}

int sample_count(double duration, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("trajectory step dt must be positive and finite");
  }
  if (duration < 0.0 || !std::isfinite(duration)) {
    throw ValidationError("trajectory.duration must be non-negative and finite");
  }
  // The relative slack absorbs cases where duration is meant to be an exact
  // multiple of dt but the quotient lands just below the integer.
  const int steps = static_cast<int>(std::floor(duration / dt + 1e-9));
  return steps + 1;
}

void validate(const TrajectorySpec& spec) {
  check_finite(spec.r0, "r0");
  check_finite(spec.r1, "r1");
  check_finite(spec.omega, "omega");
  check_finite(spec.z0, "z0");
  check_finite(spec.k_z, "k_z");
  for (int i = 0; i < 3; ++i) check_finite(spec.center[i], "center");
  if (!std::isfinite(spec.duration) || spec.duration < 0.0) {
    throw ValidationError("trajectory.duration must be non-negative and finite");
  }
  if (spec.workspace) {
    const WorkspaceBounds& b = *spec.workspace;
    for (int i = 0; i < 3; ++i) {
      check_finite(b.lower[i], "workspace.lower");
      check_finite(b.upper[i], "workspace.upper");
      if (b.lower[i] > b.upper[i]) {
        throw ValidationError("trajectory.workspace bounds are not ordered on axis " +
                              std::to_string(i));
      }
    }
  }
}

bool contains(const WorkspaceBounds& bounds, const Vector3d& p) {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < bounds.lower[i] || p[i] > bounds.upper[i]) return false;
  }
  return true;
}

}  // namespace emla
