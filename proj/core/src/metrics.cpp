#include "emla_sens/metrics.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>
#include <utility>

#include "emla_sens/dynamics.hpp"
#include "emla_sens/errors.hpp"
#include "emla_sens/log.hpp"

namespace emla {

namespace {

std::string format_mass(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

std::vector<std::vector<double>> trace_grid(int actuators, int samples) {
  return std::vector<std::vector<double>>(actuators,
                                          std::vector<double>(samples, 0.0));
}

void check_same_shape(const MetricsSeries& a, const MetricsSeries& b) {
  if (a.actuator_count() != b.actuator_count() ||
      a.sample_count() != b.sample_count()) {
    throw ValidationError(
        "metric function returned series of different shapes across payloads");
  }
}

}  // namespace

std::vector<std::vector<ActuatorPoint>> actuator_states(
    const RobotModel& model, const std::vector<TrajectorySample>& samples,
    double payload_mass) {
  const RobotModel loaded = update_payload(model, payload_mass);
  std::vector<std::vector<ActuatorPoint>> out;
  out.reserve(samples.size());
  for (const TrajectorySample& s : samples) {
    const RneaResult dyn = rnea(loaded, s.q, s.qdot, s.qddot);
    std::vector<ActuatorPoint> row;
    row.reserve(loaded.joints.size());
    for (std::size_t i = 0; i < loaded.joints.size(); ++i) {
      row.push_back(actuator_point(loaded.joints[i], s.q[i], s.qdot[i],
                                   s.qddot[i], dyn.joint_effort[i]));
    }
    out.push_back(std::move(row));
  }
  return out;
}

MetricsSeries evaluate_metrics(
    const std::vector<std::vector<ActuatorPoint>>& states,
    const std::vector<ActuatorParams>& actuators, double dt) {
  if (!(std::isfinite(dt) && dt > 0.0)) {
    throw ValidationError("evaluate_metrics requires a positive dt");
  }
  const int n_act = static_cast<int>(actuators.size());
  const int n_samples = static_cast<int>(states.size());
  for (const auto& row : states) {
    if (static_cast<int>(row.size()) != n_act) {
      throw ValidationError(
          "actuator state row width does not match the actuator count");
    }
  }

  MetricsSeries out;
  out.time.resize(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    out.time[k] = k * dt;
  }
  out.velocity = trace_grid(n_act, n_samples);
  out.force = trace_grid(n_act, n_samples);
  out.power = trace_grid(n_act, n_samples);
  out.energy = trace_grid(n_act, n_samples);
  out.conversion = trace_grid(n_act, n_samples);
  out.conversion_defined.assign(n_act, std::vector<bool>(n_samples, false));
  out.undefined_conversion_count.assign(n_act, 0);

  for (int a = 0; a < n_act; ++a) {
    const ActuatorParams& act = actuators[a];
    const EquivalentCoefficients coeff = equivalent_coefficients(act.mechanics);
    const double ratio = coeff.rad_per_meter * act.mechanics.gear_ratio *
                         act.mechanics.planetary_ratio;
    double consumed = 0.0;
    for (int k = 0; k < n_samples; ++k) {
      const ActuatorPoint& s = states[k][a];
      out.velocity[a][k] = s.velocity;
      out.force[a][k] = s.force;
      const double p_mech = s.velocity * s.force;
      out.power[a][k] = p_mech;

      // Left-endpoint integration: the sample's own contribution lands in
      // the next entry, so energy[a][0] stays exactly zero.
      out.energy[a][k] = consumed;
      if (k + 1 < n_samples && p_mech != 0.0) {
        const std::optional<double> eta =
            efficiency(act.mechanics, act.motor, s.force, s.velocity);
        if (eta) {
          consumed += dt * (p_mech > 0.0 ? p_mech / *eta : p_mech * *eta);
        }
      }

      const ElectricalState electrical = steady_state_electrical(
          act.motor, (coeff.damping * s.velocity + s.force) / ratio,
          ratio * s.velocity);
      const double p_line = electrical.electrical_power();
      double value = std::numeric_limits<double>::quiet_NaN();
      bool defined =
          std::abs(p_mech) > kTinyPower && std::abs(p_line) > kTinyPower;
      if (defined) {
        value = p_mech > 0.0 ? p_mech / p_line : p_line / p_mech;
        // A conversion ratio outside (0, 1] means the two powers disagree in
        // sign or magnitude ordering; no efficiency reading exists there.
        // The upper slack only forgives round-off at a lossless boundary.
        defined = value > 0.0 && value <= 1.0 + 1e-9;
      }
      out.conversion[a][k] =
          defined ? value : std::numeric_limits<double>::quiet_NaN();
      if (!defined) {
        ++out.undefined_conversion_count[a];
      }
      out.conversion_defined[a][k] = defined;
    }
  }
  return out;
}

SensitivityEntry sensitivity_pd(const MetricFn& metric_fn, double payload_mass,
                                double delta_m, FdScheme scheme) {
  if (!metric_fn) {
    throw ValidationError("sensitivity_pd requires a metric function");
  }
  if (!(std::isfinite(delta_m) && delta_m > 0.0)) {
    throw ValidationError("delta_m must be finite and positive");
  }
  if (!(std::isfinite(payload_mass) && payload_mass >= 0.0)) {
    throw ValidationError("payload_mass must be finite and non-negative");
  }
  if ((payload_mass + delta_m) - payload_mass < delta_m / 2.0) {
    throw ValidationError("delta_m " + format_mass(delta_m) +
                          " kg vanishes against payload " +
                          format_mass(payload_mass) +
                          " kg in double precision; use a larger delta_m");
  }

  FdScheme effective = scheme;
  if (scheme == FdScheme::central && payload_mass < delta_m) {
    // The lower evaluation point would be a negative mass.
    effective = FdScheme::forward;
    warn_once("sensitivity-forward-fallback",
              "central difference at payload " + format_mass(payload_mass) +
                  " kg would evaluate a negative mass; falling back to a "
                  "forward difference");
  }

  const MetricsSeries high = metric_fn(payload_mass + delta_m);
  const MetricsSeries low = effective == FdScheme::central
                                ? metric_fn(payload_mass - delta_m)
                                : metric_fn(payload_mass);
  check_same_shape(high, low);
  const double denom =
      effective == FdScheme::central ? 2.0 * delta_m : delta_m;

  const int n_act = high.actuator_count();
  const int n_samples = high.sample_count();
  SensitivityEntry entry;
  entry.payload = payload_mass;
  entry.delta_m = delta_m;
  entry.scheme = effective;
  entry.d_power = trace_grid(n_act, n_samples);
  entry.d_force = trace_grid(n_act, n_samples);
  entry.d_energy = trace_grid(n_act, n_samples);
  entry.d_conversion = trace_grid(n_act, n_samples);
  entry.d_conversion_defined.assign(n_act,
                                    std::vector<bool>(n_samples, false));
  for (int a = 0; a < n_act; ++a) {
    for (int k = 0; k < n_samples; ++k) {
      entry.d_power[a][k] = (high.power[a][k] - low.power[a][k]) / denom;
      entry.d_force[a][k] = (high.force[a][k] - low.force[a][k]) / denom;
      entry.d_energy[a][k] = (high.energy[a][k] - low.energy[a][k]) / denom;
      const bool defined =
          high.conversion_defined[a][k] && low.conversion_defined[a][k];
      entry.d_conversion_defined[a][k] = defined;
      entry.d_conversion[a][k] =
          defined ? (high.conversion[a][k] - low.conversion[a][k]) / denom
                  : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return entry;
}

namespace {

/// Worker-side failure captured for deterministic re-throw: the lowest grid
/// index wins regardless of thread timing.
struct SweepFailure {
  enum class Kind { validation, divergence, other } kind = Kind::other;
  std::string message;
};

}  // namespace

SensitivityReport payload_sweep(const RobotModel& model,
                                const TrajectorySpec& trajectory,
                                const std::vector<ActuatorParams>& actuators,
                                const SweepSettings& settings) {
  if (!(std::isfinite(settings.m_min) && settings.m_min >= 0.0)) {
    throw ValidationError("sweep.m_min must be finite and non-negative");
  }
  if (!(std::isfinite(settings.m_max) && settings.m_max > settings.m_min)) {
    throw ValidationError("sweep.m_max must exceed sweep.m_min");
  }
  if (settings.n_points < 2) {
    throw ValidationError("sweep.n_points must be at least 2");
  }
  if (!(std::isfinite(settings.dt) && settings.dt > 0.0)) {
    throw ValidationError("sweep.dt must be finite and positive");
  }
  if (!(std::isfinite(settings.delta_m) && settings.delta_m > 0.0)) {
    throw ValidationError("sweep.delta_m must be finite and positive");
  }
  if (settings.parallelism < 1) {
    throw ValidationError("sweep parallelism must be at least 1");
  }
  model.validate();
  validate(trajectory);
  if (actuators.size() != model.joints.size()) {
    throw ValidationError("actuator count " +
                          std::to_string(actuators.size()) +
                          " does not match the robot's " +
                          std::to_string(model.joints.size()) + " joints");
  }
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    validate(actuators[i], "actuators[" + std::to_string(i) + "]");
  }

  SensitivityReport report;
  report.dt = settings.dt;
  report.delta_m = settings.delta_m;
  report.scheme = settings.scheme;
  for (const JointSpec& joint : model.joints) {
    report.actuator_names.push_back(joint.name);
  }
  report.payload_grid.resize(settings.n_points);
  for (int i = 0; i < settings.n_points; ++i) {
    report.payload_grid[i] =
        settings.m_min + (settings.m_max - settings.m_min) * i /
                             (settings.n_points - 1);
  }

  // The joint-space run is payload-independent; share it across the grid.
  const TrajectoryRun run =
      run_trajectory(model, trajectory, settings.dt, model.payload_mass);

  const auto metric_at = [&](double mass) {
    return evaluate_metrics(actuator_states(model, run.samples, mass),
                            actuators, settings.dt);
  };

  report.records.resize(settings.n_points);
  std::vector<std::optional<SweepFailure>> failures(settings.n_points);
  const auto evaluate_point = [&](int i) {
    const double payload = report.payload_grid[i];
    try {
      PayloadRecord& record = report.records[i];
      record.payload = payload;
      record.metrics = metric_at(payload);
      record.partials =
          sensitivity_pd(metric_at, payload, settings.delta_m, settings.scheme);
    } catch (const ValidationError& e) {
      failures[i] = SweepFailure{SweepFailure::Kind::validation, e.what()};
    } catch (const DivergenceError& e) {
      failures[i] = SweepFailure{SweepFailure::Kind::divergence, e.what()};
    } catch (const std::exception& e) {
      failures[i] = SweepFailure{SweepFailure::Kind::other, e.what()};
    }
  };

  const int workers =
      std::min(settings.parallelism, settings.n_points);
  if (workers <= 1) {
    for (int i = 0; i < settings.n_points; ++i) {
      evaluate_point(i);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < settings.n_points;
             i = next.fetch_add(1)) {
          evaluate_point(i);
        }
      });
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  for (int i = 0; i < settings.n_points; ++i) {
    if (!failures[i]) {
      continue;
    }
    const std::string message = "payload " +
                                format_mass(report.payload_grid[i]) + " kg: " +
                                failures[i]->message;
    switch (failures[i]->kind) {
      case SweepFailure::Kind::validation:
        throw ValidationError(message);
      case SweepFailure::Kind::divergence:
        throw DivergenceError(message);
      case SweepFailure::Kind::other:
        throw std::runtime_error(message);
    }
  }
  return report;
}

}  // namespace emla
