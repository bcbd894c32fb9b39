// Command-line front end: loads a run configuration, sweeps the payload
// grid and serializes the metric and sensitivity reports.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emla_sens/config.hpp"
#include "emla_sens/errors.hpp"
#include "emla_sens/log.hpp"
#include "emla_sens/metrics.hpp"
#include "emla_sens/report.hpp"
#include "emla_sens/trajectory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;

struct RunArgs {
  std::string config_path;
  std::string out_dir;
  bool plots = false;
  bool dry_run = false;
  int parallel = 1;
  std::string format = "csv";
};

void print_plan(const emla::RunConfig& cfg, const RunArgs& args) {
  std::string joints;
  for (const emla::JointSpec& j : cfg.robot.joints) {
    if (!joints.empty()) {
      joints += ", ";
    }
    joints += j.name;
  }
  const int samples =
      emla::sample_count(cfg.trajectory.duration, cfg.sweep.dt);
  const char* kind = cfg.trajectory.kind == emla::TrajectoryKind::spiral
                         ? "spiral"
                         : cfg.trajectory.kind == emla::TrajectoryKind::constant
                               ? "constant"
                               : "linear";
  std::printf("config: %s\n", args.config_path.c_str());
  std::printf("robot: %zu joints (%s)\n", cfg.robot.joints.size(),
              joints.c_str());
  std::printf("trajectory: %s, duration %g s, dt %g s, %d samples\n", kind,
              cfg.trajectory.duration, cfg.sweep.dt, samples);
  std::printf("payload grid: %d points from %g to %g kg (delta_m %g kg, %s)\n",
              cfg.sweep.n_points, cfg.sweep.m_min, cfg.sweep.m_max,
              cfg.sweep.delta_m,
              cfg.sweep.scheme == emla::FdScheme::central ? "central"
                                                          : "forward");
  std::printf("workers: %d\n", args.parallel);
  const char* ext = args.format == "json" ? "json" : "csv";
  std::printf("would write to %s: %d metrics_<payload>.%s, sensitivity.%s, "
              "summary.json%s\n",
              args.out_dir.c_str(), cfg.sweep.n_points, ext, ext,
              args.plots ? ", 4 plot SVGs" : "");
}

int run_command(const RunArgs& args) {
  emla::RunConfig cfg = emla::load_config_file(args.config_path);
  cfg.sweep.parallelism = args.parallel;

  if (args.dry_run) {
    print_plan(cfg, args);
    return kExitOk;
  }

  const emla::SensitivityReport report =
      emla::payload_sweep(cfg.robot, cfg.trajectory, cfg.actuators, cfg.sweep);

  emla::ReportOptions options;
  options.out_dir = args.out_dir;
  options.format = args.format == "json" ? emla::ReportFormat::json
                                         : emla::ReportFormat::csv;
  const std::vector<std::string> written = emla::write_report(report, options);
  emla::log_info("wrote " + std::to_string(written.size()) + " report files to " +
                 args.out_dir);

  if (args.plots) {
    // Plot trouble never discards a finished sweep.
    try {
      const std::vector<std::string> plots =
          emla::emit_plots(report, args.out_dir);
      emla::log_info("wrote " + std::to_string(plots.size()) + " plot files");
    } catch (const std::exception& e) {
      emla::log_warn(std::string("plot emission failed: ") + e.what());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payload-sensitivity simulation for screw-driven manipulators"};
  app.require_subcommand(1);

  RunArgs args;
  CLI::App* run = app.add_subcommand(
      "run", "Sweep the payload grid of a run configuration");
  run->add_option("--config", args.config_path,
                  "Run configuration JSON file")
      ->required();
  run->add_option("--out", args.out_dir, "Output directory")->required();
  run->add_flag("--plots", args.plots, "Also write SVG plots");
  run->add_flag("--dry-run", args.dry_run,
                "Validate and print the plan without writing anything");
  run->add_option("--parallel", args.parallel,
                  "Worker threads for the payload grid")
      ->check(CLI::PositiveNumber);
  run->add_option("--format", args.format, "Report format (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    return run_command(args);
  } catch (const emla::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const emla::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
}
