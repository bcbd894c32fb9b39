#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace emla {

/// Electrical parameters of a surface-magnet synchronous motor in the
/// rotor-aligned dq frame (amplitude-invariant scaling).
struct PMSMParams {
  double stator_resistance = 0.0;  // R_s [ohm]
  double inductance_d = 0.0;       // L_d [H]
  double inductance_q = 0.0;       // L_q [H]
  int pole_pairs = 0;              // n_p
  double pm_flux = 0.0;            // magnet flux linkage [Wb]
};

/// Loss coefficients of one drive: iron losses against motor speed, dry and
/// viscous friction against stroke velocity. Copper loss needs no
/// coefficient; it follows from the stator resistance and current.
struct LossModel {
  double iron_hysteresis = 0.0;  // c_h [W s/rad]
  double iron_eddy = 0.0;        // c_e [W s^2/rad^2]
  double coulomb = 0.0;          // F_c [N]
  double viscous = 0.0;          // b_v [N s/m]
};

/// Series stiffnesses between motor and load, one per drivetrain interface.
struct StiffnessChain {
  double motor_planetary = 0.0;  // k_mp
  double planetary_gear = 0.0;   // k_pg
  double gear_screw = 0.0;       // k_gs
  double load = 0.0;             // k_l
};

/// Mechanical parameters of a motor + planetary + gear + screw linear drive.
struct EMLAParams {
  double screw_lead = 0.0;         // rho, linear travel per screw turn [m]
  double screw_mass = 0.0;         // translating mass [kg]
  double screw_damping = 0.0;      // b_s [N s/m]
  double motor_inertia = 0.0;      // j_m [kg m^2]
  double planetary_inertia = 0.0;  // j_p [kg m^2]
  double gear_inertia = 0.0;       // j_g [kg m^2]
  double gear_ratio = 1.0;         // N_g
  double planetary_ratio = 1.0;    // N_p
  double motor_damping = 0.0;      // b_m [N m s/rad]
  /// Engaged drivetrain compliance; nullopt models a rigid drivetrain and
  /// disables the stiffness term entirely.
  std::optional<StiffnessChain> stiffness;
  LossModel loss;
};

/// One joint's complete drive: mechanics plus motor.
struct ActuatorParams {
  EMLAParams mechanics;
  PMSMParams motor;
};

void validate(const PMSMParams& p, const std::string& path);
void validate(const EMLAParams& p, const std::string& path);
void validate(const ActuatorParams& p, const std::string& path);

/// Load-side equivalent coefficients of the whole drivetrain: reflecting
/// every rotating stage onto the stroke axis through alpha = 2 pi / lead and
/// the gear ratios turns the drive into a 1-D mass-damper(-spring) in series
/// with the load force.
struct EquivalentCoefficients {
  double mass = 0.0;           // a_eq [kg]
  double damping = 0.0;        // b_eq [N s/m]
  double stiffness = 0.0;      // c_eq [N/m]; 0 in rigid mode
  double rad_per_meter = 0.0;  // alpha = 2 pi / lead [rad/m]
  bool rigid = true;
};

EquivalentCoefficients equivalent_coefficients(const EMLAParams& p);

struct MotorPoint {
  double torque = 0.0;  // tau_m [N m]
  double speed = 0.0;   // omega_m [rad/s]
};

/// Motor torque and speed required to drive the stroke state (x, v, a)
/// against the load force: the stroke-side force balance
/// a_eq a + b_eq v [+ c_eq x] + F_l, reflected to the motor shaft by
/// alpha N_g N_p. The stiffness term only participates when a compliance
/// chain is configured.
MotorPoint motor_torque(const EMLAParams& p, double x, double v, double a,
                        double load_force);

/// Steady-state electrical operating point under i_d = 0 field-oriented
/// control, amplitude-invariant dq scaling.
struct ElectricalState {
  double i_d = 0.0;           // [A]
  double i_q = 0.0;           // [A]
  double v_d = 0.0;           // [V]
  double v_q = 0.0;           // [V]
  double v_ll = 0.0;          // line-to-line RMS voltage [V]
  double i_ll = 0.0;          // line RMS current magnitude [A]
  double power_factor = 0.0;  // signed cos(phi); 0 at the all-zero state
  double speed = 0.0;         // omega_m [rad/s]

  /// sqrt(3) V_LL I_LL cos(phi): positive motoring, negative regenerating.
  double electrical_power() const;
};

ElectricalState steady_state_electrical(const PMSMParams& m, double torque,
                                        double speed);

/// Drive efficiency at a stroke operating point (force, velocity), from the
/// loss stack at the steady state sustaining that point: copper loss via the
/// q current, iron loss against motor speed, friction against the stroke.
/// Motoring (f v > 0): eta = P / (P + losses) with P = |f v|.
/// Regenerating (f v < 0): the fraction of absorbed power returned,
/// max(0, 1 - losses / |f v|).
/// Zero mechanical power: no meaningful ratio exists; returns nullopt.
std::optional<double> efficiency(const EMLAParams& p, const PMSMParams& m,
                                 double force, double velocity);

/// Efficiency sampled on a force x velocity grid; row i is force point i,
/// column j velocity point j, both linearly spaced over the closed ranges.
/// Undefined cells (zero mechanical power) hold NaN.
Eigen::MatrixXd efficiency_map_grid(const EMLAParams& p, const PMSMParams& m,
                                    std::pair<double, double> f_range,
                                    std::pair<double, double> v_range, int n_f,
                                    int n_v);

}  // namespace emla
