#include "emla_sens/emla_actuator.hpp"

#include <cmath>
#include <limits>

#include "emla_sens/errors.hpp"

namespace emla {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const std::string& path, const char* what) {
  if (!ok) {
    throw ValidationError(path + " " + what);
  }
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void validate(const PMSMParams& p, const std::string& path) {
  // A zero stator resistance is accepted on purpose: it models an idealized
  // lossless winding, which the metrics layer relies on as a reference case.
  require(finite(p.stator_resistance) && p.stator_resistance >= 0.0,
          path + ".stator_resistance", "must be finite and non-negative");
  require(finite(p.inductance_d) && p.inductance_d > 0.0,
          path + ".inductance_d", "must be finite and positive");
  require(finite(p.inductance_q) && p.inductance_q > 0.0,
          path + ".inductance_q", "must be finite and positive");
  require(p.pole_pairs >= 1, path + ".pole_pairs", "must be at least 1");
  require(finite(p.pm_flux) && p.pm_flux > 0.0, path + ".pm_flux",
          "must be finite and positive");
}

void validate(const EMLAParams& p, const std::string& path) {
  require(finite(p.screw_lead) && p.screw_lead > 0.0, path + ".screw_lead",
          "must be finite and positive");
  require(finite(p.screw_mass) && p.screw_mass >= 0.0, path + ".screw_mass",
          "must be finite and non-negative");
  require(finite(p.screw_damping) && p.screw_damping >= 0.0,
          path + ".screw_damping", "must be finite and non-negative");
  require(finite(p.motor_inertia) && p.motor_inertia >= 0.0,
          path + ".motor_inertia", "must be finite and non-negative");
  require(finite(p.planetary_inertia) && p.planetary_inertia >= 0.0,
          path + ".planetary_inertia", "must be finite and non-negative");
  require(finite(p.gear_inertia) && p.gear_inertia >= 0.0,
          path + ".gear_inertia", "must be finite and non-negative");
  require(finite(p.gear_ratio) && p.gear_ratio >= 1.0, path + ".gear_ratio",
          "must be finite and at least 1");
  require(finite(p.planetary_ratio) && p.planetary_ratio >= 1.0,
          path + ".planetary_ratio", "must be finite and at least 1");
  require(finite(p.motor_damping) && p.motor_damping >= 0.0,
          path + ".motor_damping", "must be finite and non-negative");
  if (p.stiffness) {
    require(finite(p.stiffness->motor_planetary) &&
                p.stiffness->motor_planetary > 0.0,
            path + ".stiffness.motor_planetary", "must be finite and positive");
    require(finite(p.stiffness->planetary_gear) &&
                p.stiffness->planetary_gear > 0.0,
            path + ".stiffness.planetary_gear", "must be finite and positive");
    require(finite(p.stiffness->gear_screw) && p.stiffness->gear_screw > 0.0,
            path + ".stiffness.gear_screw", "must be finite and positive");
    require(finite(p.stiffness->load) && p.stiffness->load > 0.0,
            path + ".stiffness.load", "must be finite and positive");
  }
  require(finite(p.loss.iron_hysteresis) && p.loss.iron_hysteresis >= 0.0,
          path + ".loss.iron_hysteresis", "must be finite and non-negative");
  require(finite(p.loss.iron_eddy) && p.loss.iron_eddy >= 0.0,
          path + ".loss.iron_eddy", "must be finite and non-negative");
  require(finite(p.loss.coulomb) && p.loss.coulomb >= 0.0, path + ".loss.coulomb",
          "must be finite and non-negative");
  require(finite(p.loss.viscous) && p.loss.viscous >= 0.0, path + ".loss.viscous",
          "must be finite and non-negative");
}

void validate(const ActuatorParams& p, const std::string& path) {
  validate(p.mechanics, path + ".mechanics");
  validate(p.motor, path + ".pmsm");
}

EquivalentCoefficients equivalent_coefficients(const EMLAParams& p) {
  if (!(std::isfinite(p.screw_lead) && p.screw_lead > 0.0)) {
    throw ValidationError("screw_lead must be finite and positive");
  }
  EquivalentCoefficients c;
  c.rad_per_meter = 2.0 * kPi / p.screw_lead;
  const double a2 = c.rad_per_meter * c.rad_per_meter;
  const double ng2 = p.gear_ratio * p.gear_ratio;
  const double ngp = p.gear_ratio * p.planetary_ratio;
  // Rotary inertias reflect to the stroke axis through alpha^2, each scaled
  // by the ratio stages between it and the screw.
  c.mass = p.screw_mass +
           a2 * (p.gear_inertia + ng2 * p.planetary_inertia +
                 ngp * ngp * p.motor_inertia);
  c.damping = p.screw_damping +
              (c.rad_per_meter * ngp) * (c.rad_per_meter * ngp) * p.motor_damping;
  c.rigid = !p.stiffness.has_value();
  if (p.stiffness) {
    const StiffnessChain& k = *p.stiffness;
    const double compliance = 1.0 / (ngp * ngp * k.motor_planetary) +
                              1.0 / (ng2 * k.planetary_gear) +
                              1.0 / k.gear_screw + 1.0 / k.load;
    c.stiffness = a2 / compliance;
  }
  return c;
}

MotorPoint motor_torque(const EMLAParams& p, double x, double v, double a,
                        double load_force) {
  const EquivalentCoefficients c = equivalent_coefficients(p);
  const double ratio = c.rad_per_meter * p.gear_ratio * p.planetary_ratio;
  double force = c.mass * a + c.damping * v + load_force;
  if (!c.rigid) {
    force += c.stiffness * x;
  }
  MotorPoint out;
  out.torque = force / ratio;
  out.speed = ratio * v;
  return out;
}

double ElectricalState::electrical_power() const {
  return std::sqrt(3.0) * v_ll * i_ll * power_factor;
}

ElectricalState steady_state_electrical(const PMSMParams& m, double torque,
                                        double speed) {
  const double torque_per_amp = 1.5 * m.pole_pairs * m.pm_flux;
  if (!(torque_per_amp > 0.0)) {
    throw ValidationError(
        "steady_state_electrical requires positive pole_pairs and pm_flux");
  }
  ElectricalState s;
  s.speed = speed;
  s.i_d = 0.0;
  s.i_q = torque / torque_per_amp;
  const double omega_e = m.pole_pairs * speed;
  s.v_d = -omega_e * m.inductance_q * s.i_q;
  s.v_q = m.stator_resistance * s.i_q + omega_e * m.pm_flux;
  const double v_phase = std::hypot(s.v_d, s.v_q);
  s.v_ll = std::sqrt(3.0) * v_phase / std::sqrt(2.0);
  s.i_ll = std::abs(s.i_q) / std::sqrt(2.0);
  const double denom = v_phase * std::abs(s.i_q);
  // The sign of v_q i_q distinguishes motoring from regeneration; at the
  // all-zero state no phase angle exists and the factor reports 0.
  s.power_factor = denom > 0.0 ? (s.v_q * s.i_q) / denom : 0.0;
  return s;
}

std::optional<double> efficiency(const EMLAParams& p, const PMSMParams& m,
                                 double force, double velocity) {
  const double p_mech = force * velocity;
  if (p_mech == 0.0) {
    return std::nullopt;
  }
  const EquivalentCoefficients c = equivalent_coefficients(p);
  const double ratio = c.rad_per_meter * p.gear_ratio * p.planetary_ratio;
  const double omega = ratio * velocity;
  // Steady point sustaining (force, velocity): no acceleration, so the motor
  // carries the load force plus the drive's own damping.
  const double torque = (c.damping * velocity + force) / ratio;
  const double i_q = torque / (1.5 * m.pole_pairs * m.pm_flux);
  const double p_copper = 1.5 * m.stator_resistance * i_q * i_q;
  const double p_iron = p.loss.iron_hysteresis * std::abs(omega) +
                        p.loss.iron_eddy * omega * omega;
  const double p_friction =
      p.loss.coulomb * std::abs(velocity) + p.loss.viscous * velocity * velocity;
  const double losses = p_copper + p_iron + p_friction;
  if (p_mech > 0.0) {
    return p_mech / (p_mech + losses);
  }
  return std::max(0.0, 1.0 - losses / -p_mech);
}

Eigen::MatrixXd efficiency_map_grid(const EMLAParams& p, const PMSMParams& m,
                                    std::pair<double, double> f_range,
                                    std::pair<double, double> v_range, int n_f,
                                    int n_v) {
  if (n_f < 1 || n_v < 1) {
    throw ValidationError("efficiency_map_grid needs at least one point per axis");
  }
  auto grid_point = [](std::pair<double, double> range, int i, int n) {
    if (n == 1) {
      return range.first;
    }
    return range.first + (range.second - range.first) * i / (n - 1);
  };
  Eigen::MatrixXd map(n_f, n_v);
  for (int i = 0; i < n_f; ++i) {
    const double f = grid_point(f_range, i, n_f);
    for (int j = 0; j < n_v; ++j) {
      const double v = grid_point(v_range, j, n_v);
      const std::optional<double> eta = efficiency(p, m, f, v);
      map(i, j) = eta ? *eta : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return map;
}

}  // namespace emla
