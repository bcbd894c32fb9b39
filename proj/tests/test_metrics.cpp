#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "emla_sens/dynamics.hpp"
#include "emla_sens/errors.hpp"
#include "emla_sens/kinematics.hpp"
#include "emla_sens/metrics.hpp"
#include "support/models.hpp"

using namespace emla;

namespace {

ActuatorParams lossless_drive() {
  ActuatorParams a;
  a.mechanics.screw_lead = 0.01;
  a.mechanics.screw_mass = 5.0;
  a.motor.stator_resistance = 0.0;
  a.motor.inductance_d = 1.2e-3;
  a.motor.inductance_q = 1.2e-3;
  a.motor.pole_pairs = 4;
  a.motor.pm_flux = 0.1;
  return a;
}

ActuatorParams lossy_drive() {
  ActuatorParams a = lossless_drive();
  a.motor.stator_resistance = 0.5;
  a.mechanics.loss.coulomb = 50.0;
  a.mechanics.loss.viscous = 100.0;
  a.mechanics.loss.iron_hysteresis = 0.01;
  return a;
}

std::vector<std::vector<ActuatorPoint>> constant_states(int n, double v,
                                                        double f) {
  ActuatorPoint p;
  p.velocity = v;
  p.force = f;
  p.gain = 1.0;
  return std::vector<std::vector<ActuatorPoint>>(n, {p});
}

/// Synthetic per-payload series with known closed-form payload dependence:
/// power m^2, force 3m, energy m^3, conversion 1/(1+m).
MetricsSeries synthetic_series(double m, int n_samples = 4) {
  MetricsSeries s;
  s.time.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    s.time[k] = 0.1 * k;
  }
  s.velocity.assign(1, std::vector<double>(n_samples, 0.1));
  s.force.assign(1, std::vector<double>(n_samples, 3.0 * m));
  s.power.assign(1, std::vector<double>(n_samples, m * m));
  s.energy.assign(1, std::vector<double>(n_samples, m * m * m));
  s.conversion.assign(1, std::vector<double>(n_samples, 1.0 / (1.0 + m)));
  s.conversion_defined.assign(1, std::vector<bool>(n_samples, true));
  s.undefined_conversion_count.assign(1, 0);
  return s;
}

}  // namespace

TEST_CASE("power trace is stroke velocity times stroke force") {
  auto states = constant_states(3, 0.2, 1500.0);
  states[1][0].velocity = -0.05;
  states[2][0].force = -800.0;
  const MetricsSeries s = evaluate_metrics(states, {lossy_drive()}, 0.1);
  REQUIRE(s.actuator_count() == 1);
  REQUIRE(s.sample_count() == 3);
  CHECK(s.power[0][0] == 0.2 * 1500.0);
  CHECK(s.power[0][1] == -0.05 * 1500.0);
  CHECK(s.power[0][2] == 0.2 * -800.0);
  CHECK(s.force[0][2] == -800.0);
  CHECK(s.velocity[0][1] == -0.05);
  CHECK(s.time[2] == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("consumption starts at zero and ends at the left-rule integral") {
  // 100 W delivered at 80 % efficiency over 8 s: 1000 J drawn from the line.
  ActuatorParams drive = lossless_drive();
  drive.mechanics.loss.coulomb = 250.0;
  const int n = 81;  // 8 s at dt = 0.1
  const MetricsSeries s =
      evaluate_metrics(constant_states(n, 0.1, 1000.0), {drive}, 0.1);
  CHECK(s.energy[0][0] == 0.0);
  CHECK(s.energy[0][n - 1] == doctest::Approx(1000.0).epsilon(1e-13));
  // Monotone while the integrand stays positive.
  for (int k = 1; k < n; ++k) {
    CHECK(s.energy[0][k] > s.energy[0][k - 1]);
  }
}

TEST_CASE("unit efficiency consumption equals the plain power sum bit for bit") {
  const int n = 40;
  auto states = constant_states(n, 0.0, 0.0);
  for (int k = 0; k < n; ++k) {
    states[k][0].velocity = 0.1 + 0.01 * k;
    states[k][0].force = 1000.0 - 7.0 * k;
  }
  const double dt = 0.05;
  const MetricsSeries s = evaluate_metrics(states, {lossless_drive()}, dt);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    CHECK(s.energy[0][k] == acc);
    acc += dt * s.power[0][k];
  }
}

TEST_CASE("regeneration credits the scaled-down recovered energy") {
  // -100 W absorbed, 25 W lost to friction: 75 W actually returned.
  ActuatorParams drive = lossless_drive();
  drive.mechanics.loss.coulomb = 250.0;
  const MetricsSeries s =
      evaluate_metrics(constant_states(11, 0.1, -1000.0), {drive}, 0.1);
  CHECK(s.energy[0][10] == doctest::Approx(-75.0).epsilon(1e-13));
}

TEST_CASE("conversion ratio matches the steady line power while motoring") {
  const ActuatorParams drive = lossy_drive();
  const double v = 0.12;
  const double f = 900.0;
  const MetricsSeries s = evaluate_metrics(constant_states(2, v, f), {drive}, 0.1);
  const EquivalentCoefficients c = equivalent_coefficients(drive.mechanics);
  const double ratio = c.rad_per_meter;
  const ElectricalState e = steady_state_electrical(
      drive.motor, (c.damping * v + f) / ratio, ratio * v);
  REQUIRE(s.conversion_defined[0][0]);
  CHECK(s.conversion[0][0] == f * v / e.electrical_power());
  CHECK(s.conversion[0][0] > 0.0);
  CHECK(s.conversion[0][0] < 1.0);
  CHECK(s.undefined_conversion_count[0] == 0);
}

TEST_CASE("lossless conversion is one to round-off") {
  const MetricsSeries s =
      evaluate_metrics(constant_states(5, 0.2, 1200.0), {lossless_drive()}, 0.1);
  for (int k = 0; k < 5; ++k) {
    REQUIRE(s.conversion_defined[0][k]);
    CHECK(std::abs(s.conversion[0][k] - 1.0) <= 1e-12);
  }
}

TEST_CASE("standstill samples have no conversion ratio") {
  const MetricsSeries s =
      evaluate_metrics(constant_states(4, 0.0, 2000.0), {lossy_drive()}, 0.1);
  for (int k = 0; k < 4; ++k) {
    CHECK_FALSE(s.conversion_defined[0][k]);
    CHECK(std::isnan(s.conversion[0][k]));
  }
  CHECK(s.undefined_conversion_count[0] == 4);
}

TEST_CASE("each undefined instant is counted exactly once") {
  auto states = constant_states(6, 0.1, 1000.0);
  states[1][0].velocity = 0.0;
  states[4][0].force = 0.0;
  const MetricsSeries s = evaluate_metrics(states, {lossy_drive()}, 0.1);
  CHECK(s.undefined_conversion_count[0] == 2);
  CHECK(s.conversion_defined[0][0]);
  CHECK_FALSE(s.conversion_defined[0][1]);
  CHECK_FALSE(s.conversion_defined[0][4]);
}

TEST_CASE("regenerating conversion compares line power against absorbed power") {
  ActuatorParams drive = lossless_drive();
  drive.motor.stator_resistance = 0.05;
  const double v = 0.1;
  const double f = -1000.0;
  const MetricsSeries s = evaluate_metrics(constant_states(2, v, f), {drive}, 0.1);
  const EquivalentCoefficients c = equivalent_coefficients(drive.mechanics);
  const ElectricalState e = steady_state_electrical(
      drive.motor, f / c.rad_per_meter, c.rad_per_meter * v);
  REQUIRE(s.conversion_defined[0][0]);
  CHECK(s.conversion[0][0] == e.electrical_power() / (f * v));
  CHECK(s.conversion[0][0] > 0.0);
  CHECK(s.conversion[0][0] < 1.0);
}

TEST_CASE("losses swamping the recovered power leave the ratio undefined") {
  // Copper loss exceeds the absorbed 10 W, so line power crosses zero and
  // no meaningful recovery fraction exists at the sample.
  ActuatorParams drive = lossless_drive();
  drive.motor.stator_resistance = 50.0;
  const MetricsSeries s =
      evaluate_metrics(constant_states(3, 0.01, -1000.0), {drive}, 0.1);
  for (int k = 0; k < 3; ++k) {
    CHECK_FALSE(s.conversion_defined[0][k]);
  }
  CHECK(s.undefined_conversion_count[0] == 3);
}

TEST_CASE("metric evaluation validates its inputs") {
  auto states = constant_states(3, 0.1, 100.0);
  CHECK_THROWS_AS(evaluate_metrics(states, {lossy_drive()}, 0.0),
                  ValidationError);
  states[1].push_back(ActuatorPoint{});
  CHECK_THROWS_AS(evaluate_metrics(states, {lossy_drive()}, 0.1),
                  ValidationError);
}

TEST_CASE("central differencing recovers polynomial payload slopes") {
  const MetricFn fn = [](double m) { return synthetic_series(m); };
  const SensitivityEntry e = sensitivity_pd(fn, 10.0, 1e-3, FdScheme::central);
  CHECK(e.scheme == FdScheme::central);
  CHECK(e.payload == 10.0);
  for (int k = 0; k < 4; ++k) {
    // Central differences are exact on quadratics; cubics leave the delta^2
    // truncation term, here 1e-6.
    CHECK(e.d_power[0][k] == doctest::Approx(2.0 * 10.0).epsilon(1e-9));
    CHECK(e.d_force[0][k] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(e.d_energy[0][k] == doctest::Approx(300.0).epsilon(1e-7));
    CHECK(e.d_conversion[0][k] ==
          doctest::Approx(-1.0 / 121.0).epsilon(1e-6));
    CHECK(e.d_conversion_defined[0][k]);
  }
}

TEST_CASE("forward differencing carries its first-order bias") {
  const MetricFn fn = [](double m) { return synthetic_series(m); };
  const double delta = 1e-3;
  const SensitivityEntry e = sensitivity_pd(fn, 10.0, delta, FdScheme::forward);
  CHECK(e.scheme == FdScheme::forward);
  // ((m + d)^2 - m^2) / d = 2 m + d.
  CHECK(e.d_power[0][0] == doctest::Approx(20.0 + delta).epsilon(1e-10));
}

TEST_CASE("central differencing falls back to forward at tiny payloads") {
  const MetricFn fn = [](double m) { return synthetic_series(m); };
  const SensitivityEntry e = sensitivity_pd(fn, 0.0, 1e-3, FdScheme::central);
  CHECK(e.scheme == FdScheme::forward);
  CHECK(e.d_force[0][0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("steps below double precision are rejected by name") {
  const MetricFn fn = [](double m) { return synthetic_series(m); };
  CHECK_THROWS_WITH_AS(sensitivity_pd(fn, 100.0, 2e-24, FdScheme::central),
                       doctest::Contains("delta_m"), ValidationError);
  CHECK_THROWS_AS(sensitivity_pd(fn, 10.0, 0.0, FdScheme::central),
                  ValidationError);
  CHECK_THROWS_AS(sensitivity_pd(fn, -1.0, 1e-3, FdScheme::central),
                  ValidationError);
}

TEST_CASE("shape drift across payload evaluations is an error") {
  const MetricFn fn = [](double m) {
    return synthetic_series(m, m > 5.0 ? 5 : 4);
  };
  CHECK_THROWS_AS(sensitivity_pd(fn, 5.0, 1.0, FdScheme::central),
                  ValidationError);
}

TEST_CASE("conversion partials exist only where both evaluations are defined") {
  const MetricFn fn = [](double m) {
    MetricsSeries s = synthetic_series(m);
    if (m > 5.0) {
      s.conversion_defined[0][2] = false;
      s.conversion[0][2] = std::numeric_limits<double>::quiet_NaN();
      s.undefined_conversion_count[0] = 1;
    }
    return s;
  };
  const SensitivityEntry e = sensitivity_pd(fn, 5.0, 1.0, FdScheme::central);
  CHECK(e.d_conversion_defined[0][0]);
  CHECK_FALSE(e.d_conversion_defined[0][2]);
  CHECK(std::isnan(e.d_conversion[0][2]));
}

TEST_CASE("actuator states map inverse dynamics through the joint drives") {
  const RobotModel model = emla::testing::planar_crane();
  const Eigen::VectorXd q = model.initial_q;
  const Eigen::VectorXd qdot = Eigen::VectorXd::Constant(3, 0.1);
  const Eigen::VectorXd qddot = Eigen::VectorXd::Constant(3, -0.2);
  std::vector<TrajectorySample> samples(1);
  samples[0].t = 0.0;
  samples[0].q = q;
  samples[0].qdot = qdot;
  samples[0].qddot = qddot;
  const auto states = actuator_states(model, samples, 25.0);
  REQUIRE(states.size() == 1);
  REQUIRE(states[0].size() == 3);
  const RneaResult dyn = rnea(update_payload(model, 25.0), q, qdot, qddot);
  for (int i = 0; i < 3; ++i) {
    const ActuatorPoint expected = actuator_point(
        model.joints[i], q[i], qdot[i], qddot[i], dyn.joint_effort[i]);
    CHECK(states[0][i].force == expected.force);
    CHECK(states[0][i].velocity == expected.velocity);
    CHECK(states[0][i].position == expected.position);
  }
}

namespace {

/// A slow vertical feed on the one-joint lift: constant-speed climb, so the
/// stroke force is the held weight and the payload dependence is exactly g.
TrajectorySpec climb_trajectory() {
  TrajectorySpec t;
  t.kind = TrajectoryKind::linear;
  t.center = Vector3d::Zero();
  t.r0 = 0.0;
  t.r1 = 0.0;
  t.omega = 0.0;
  t.z0 = 0.0;
  t.k_z = 0.05;
  t.duration = 1.0;
  return t;
}

SweepSettings small_sweep(int parallelism = 1) {
  SweepSettings s;
  s.m_min = 0.0;
  s.m_max = 10.0;
  s.n_points = 5;
  s.delta_m = 1e-4;
  s.scheme = FdScheme::central;
  s.dt = 0.1;
  s.parallelism = parallelism;
  return s;
}

}  // namespace

TEST_CASE("payload sweep covers the grid and differentiates the held weight") {
  const RobotModel model = emla::testing::vertical_lift();
  const std::vector<ActuatorParams> drives = {lossy_drive()};
  const SensitivityReport report =
      payload_sweep(model, climb_trajectory(), drives, small_sweep());
  REQUIRE(report.records.size() == 5);
  CHECK(report.payload_grid.front() == 0.0);
  CHECK(report.payload_grid.back() == 10.0);
  CHECK(report.payload_grid[2] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(report.actuator_names == std::vector<std::string>{"lift"});
  for (const PayloadRecord& r : report.records) {
    REQUIRE(r.metrics.sample_count() == 11);
    // Constant climb after the first integration step: the held force is the
    // total weight, so its payload slope is g.
    for (int k = 2; k < 11; ++k) {
      CHECK(r.metrics.force[0][k] ==
            doctest::Approx((10.0 + r.payload) * 9.81).epsilon(1e-6));
      CHECK(std::abs(r.partials.d_force[0][k] - 9.81) <= 1e-6);
    }
    CHECK(r.metrics.force[0][5] > 0.0);
  }
  // The boundary payload cannot take a central step down.
  CHECK(report.records.front().partials.scheme == FdScheme::forward);
  CHECK(report.records.back().partials.scheme == FdScheme::central);
}

TEST_CASE("parallel and serial sweeps produce identical numbers") {
  const RobotModel model = emla::testing::vertical_lift();
  const std::vector<ActuatorParams> drives = {lossy_drive()};
  const SensitivityReport serial =
      payload_sweep(model, climb_trajectory(), drives, small_sweep(1));
  const SensitivityReport parallel =
      payload_sweep(model, climb_trajectory(), drives, small_sweep(4));
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    const PayloadRecord& a = serial.records[i];
    const PayloadRecord& b = parallel.records[i];
    CHECK(a.payload == b.payload);
    for (int k = 0; k < a.metrics.sample_count(); ++k) {
      CHECK(a.metrics.force[0][k] == b.metrics.force[0][k]);
      CHECK(a.metrics.energy[0][k] == b.metrics.energy[0][k]);
      CHECK(a.partials.d_energy[0][k] == b.partials.d_energy[0][k]);
      CHECK(a.partials.d_force[0][k] == b.partials.d_force[0][k]);
    }
  }
}

TEST_CASE("a failing payload aborts the sweep and is named") {
  const RobotModel model = emla::testing::vertical_lift();
  SweepSettings s = small_sweep();
  // At 1e20 kg the default step vanishes in double precision, so the
  // per-payload differentiation fails; the diagnostic must say where.
  s.m_min = 1e20;
  s.m_max = 2e20;
  s.n_points = 2;
  CHECK_THROWS_WITH_AS(
      payload_sweep(model, climb_trajectory(), {lossy_drive()}, s),
      doctest::Contains("payload 1e+20 kg"), ValidationError);
}

TEST_CASE("sweep validation rejects malformed grids up front") {
  const RobotModel model = emla::testing::vertical_lift();
  const std::vector<ActuatorParams> drives = {lossy_drive()};
  SweepSettings degenerate = small_sweep();
  degenerate.m_max = degenerate.m_min;
  CHECK_THROWS_AS(payload_sweep(model, climb_trajectory(), drives, degenerate),
                  ValidationError);
  SweepSettings single = small_sweep();
  single.n_points = 1;
  CHECK_THROWS_AS(payload_sweep(model, climb_trajectory(), drives, single),
                  ValidationError);
  SweepSettings negative = small_sweep();
  negative.m_min = -1.0;
  negative.m_max = 1.0;
  CHECK_THROWS_AS(payload_sweep(model, climb_trajectory(), drives, negative),
                  ValidationError);
  SweepSettings no_workers = small_sweep();
  no_workers.parallelism = 0;
  CHECK_THROWS_AS(payload_sweep(model, climb_trajectory(), drives, no_workers),
                  ValidationError);
  CHECK_THROWS_AS(payload_sweep(model, climb_trajectory(),
                                {lossy_drive(), lossy_drive()}, small_sweep()),
                  ValidationError);
}
