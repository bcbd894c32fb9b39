// Microbenchmarks over the pipeline's hot paths, all on the shipped
// three-joint machine so the numbers track what a real sweep spends its
// time on. The trajectory-level cases use a shortened horizon: the work per
// sample is what matters, not the horizon length.

#include <benchmark/benchmark.h>

#include <emla_sens/config.hpp>
#include <emla_sens/dynamics.hpp>
#include <emla_sens/emla_actuator.hpp>
#include <emla_sens/kinematics.hpp>
#include <emla_sens/metrics.hpp>

using namespace emla;

namespace {

const RunConfig& config() {
  static RunConfig cfg =
      load_config_file(std::string(EMLA_BENCH_CONFIG_DIR) + "/hdmm_sweep.json");
  return cfg;
}

TrajectorySpec short_spiral() {
  TrajectorySpec t = config().trajectory;
  t.duration = 1.0;
  return t;
}

/// One precomputed second of the spiral, shared by the per-sample cases.
const TrajectoryRun& short_run() {
  static TrajectoryRun run =
      run_trajectory(config().robot, short_spiral(), 2e-3, 0.0);
  return run;
}

void forward_kinematics_pose(benchmark::State& state) {
  const RobotModel& model = config().robot;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_kinematics(model, model.initial_q));
  }
}
BENCHMARK(forward_kinematics_pose);

void jacobian_pair(benchmark::State& state) {
  const RobotModel& model = config().robot;
  const Eigen::VectorXd qdot = Eigen::VectorXd::Constant(model.dof(), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(get_jacobian(model, model.initial_q, qdot));
  }
}
BENCHMARK(jacobian_pair);

void inverse_dynamics(benchmark::State& state) {
  const RobotModel& model = config().robot;
  const TrajectorySample& s = short_run().samples.back();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rnea(model, s.q, s.qdot, s.qddot));
  }
}
BENCHMARK(inverse_dynamics);

void ik_single_step(benchmark::State& state) {
  const RobotModel& model = config().robot;
  const TrajectoryPoint ref = evaluate(short_spiral(), 0.5);
  const TrajectorySample& s = short_run().samples.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ik_step(model, s.q, s.qdot, ref, 2e-3));
  }
}
BENCHMARK(ik_single_step);

void steady_electrical_point(benchmark::State& state) {
  const PMSMParams& motor = config().actuators[0].motor;
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_state_electrical(motor, 14.0, 120.0));
  }
}
BENCHMARK(steady_electrical_point);

void drive_efficiency_point(benchmark::State& state) {
  const ActuatorParams& act = config().actuators[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(efficiency(act.mechanics, act.motor, 9000.0, 0.15));
  }
}
BENCHMARK(drive_efficiency_point);

void trajectory_second(benchmark::State& state) {
  const RobotModel& model = config().robot;
  const TrajectorySpec traj = short_spiral();
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trajectory(model, traj, 2e-3, 0.0));
  }
}
BENCHMARK(trajectory_second)->Unit(benchmark::kMillisecond);

/// The unit of work the sweep pool dispatches per payload: inverse dynamics
/// over every sample plus the metric traces.
void sweep_payload_evaluation(benchmark::State& state) {
  const RunConfig& cfg = config();
  const TrajectoryRun& run = short_run();
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_metrics(
        actuator_states(cfg.robot, run.samples, 120.0), cfg.actuators, 2e-3));
  }
}
BENCHMARK(sweep_payload_evaluation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
