#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emla_sens/emla_actuator.hpp"
#include "emla_sens/kinematics.hpp"
#include "emla_sens/robot_model.hpp"
#include "emla_sens/trajectory.hpp"

namespace emla {

/// Powers smaller than this have no meaningful conversion ratio.
inline constexpr double kTinyPower = 1e-12;

/// Per-actuator traces over a run's uniform time grid. Outer index is the
/// actuator, inner the sample. `energy` is the running consumed energy,
/// integrated with the left-endpoint rule so energy[a][0] == 0 and the final
/// entry covers the whole horizon. `conversion` holds the delivered-power to
/// line-power ratio where it is defined and NaN elsewhere;
/// `conversion_defined` is the companion mask. Wherever defined the ratio
/// lies in (0, 1] up to round-off in the electrical chain.
struct MetricsSeries {
  std::vector<double> time;
  std::vector<std::vector<double>> velocity;  // stroke velocity v_x [m/s]
  std::vector<std::vector<double>> force;     // stroke force f_x [N]
  std::vector<std::vector<double>> power;     // v_x f_x [W]
  std::vector<std::vector<double>> energy;    // cumulative consumption [J]
  std::vector<std::vector<double>> conversion;
  std::vector<std::vector<bool>> conversion_defined;
  std::vector<int> undefined_conversion_count;

  int actuator_count() const { return static_cast<int>(force.size()); }
  int sample_count() const { return static_cast<int>(time.size()); }
};

/// Stroke-side actuator states for every sample of a run, with the given
/// payload folded into the terminal link: inverse dynamics per sample, then
/// each joint's effort mapped through its transmission. Outer index is the
/// sample, inner the actuator.
std::vector<std::vector<ActuatorPoint>> actuator_states(
    const RobotModel& model, const std::vector<TrajectorySample>& samples,
    double payload_mass);

/// Turns per-sample actuator states into the metric traces. Consumption
/// integrates delivered power weighted by drive efficiency: motoring samples
/// draw v f / eta from the line, regenerating samples return v f * eta, and
/// zero-power samples contribute nothing. The conversion ratio compares
/// delivered power against the line power of the steady electrical operating
/// point sustaining the sample's (force, velocity); it is undefined at
/// (near-)zero mechanical or line power and whenever transient bookkeeping
/// would push it outside (0, 1].
MetricsSeries evaluate_metrics(
    const std::vector<std::vector<ActuatorPoint>>& states,
    const std::vector<ActuatorParams>& actuators, double dt);

enum class FdScheme { forward, central };

/// Elementwise finite-difference payload partials of every metric trace.
/// `scheme` records the scheme actually applied (a central request falls
/// back to forward when the lower evaluation point would be negative).
/// Conversion partials carry their own mask: defined only where the ratio is
/// defined at every evaluated payload.
struct SensitivityEntry {
  double payload = 0.0;
  double delta_m = 0.0;
  FdScheme scheme = FdScheme::central;
  std::vector<std::vector<double>> d_power;
  std::vector<std::vector<double>> d_force;
  std::vector<std::vector<double>> d_energy;
  std::vector<std::vector<double>> d_conversion;
  std::vector<std::vector<bool>> d_conversion_defined;
};

using MetricFn = std::function<MetricsSeries(double)>;

/// Differentiates metric_fn at the given payload with step delta_m. Throws
/// when delta_m vanishes against the payload in double precision (the
/// difference would be pure round-off) and when the evaluations disagree in
/// shape.
SensitivityEntry sensitivity_pd(const MetricFn& metric_fn, double payload_mass,
                                double delta_m, FdScheme scheme);

struct SweepSettings {
  double m_min = 0.0;
  double m_max = 0.0;
  int n_points = 0;
  double delta_m = 1e-4;
  FdScheme scheme = FdScheme::central;
  double dt = 0.0;
  int parallelism = 1;
};

struct PayloadRecord {
  double payload = 0.0;
  MetricsSeries metrics;
  SensitivityEntry partials;
};

struct SensitivityReport {
  std::vector<double> payload_grid;
  std::vector<PayloadRecord> records;  // one per grid point, grid order
  std::vector<std::string> actuator_names;
  double dt = 0.0;
  double delta_m = 0.0;
  FdScheme scheme = FdScheme::central;
};

/// Runs the reference trajectory once (the tool path does not depend on the
/// carried mass, so the joint-space run is shared), then evaluates metrics
/// and payload partials for every point of the linear payload grid.
/// parallelism > 1 distributes grid points over worker threads; the report
/// is assembled by grid index, so results are identical for any degree.
/// A failure at any payload aborts the sweep naming that payload.
SensitivityReport payload_sweep(const RobotModel& model,
                                const TrajectorySpec& trajectory,
                                const std::vector<ActuatorParams>& actuators,
                                const SweepSettings& settings);

}  // namespace emla
