#pragma once

#include <string>
#include <vector>

#include "emla_sens/emla_actuator.hpp"
#include "emla_sens/metrics.hpp"
#include "emla_sens/robot_model.hpp"
#include "emla_sens/trajectory.hpp"

namespace emla {

/// Everything one sweep run needs, as loaded from a single JSON document.
struct RunConfig {
  RobotModel robot;
  std::vector<ActuatorParams> actuators;  // one per joint, joint order
  TrajectorySpec trajectory;
  SweepSettings sweep;  // parallelism is a runtime choice, not a config field
};

/// Parses and validates a run configuration. `base_dir` resolves a relative
/// "robot_path" reference; an empty base keeps the path as given. Throws
/// ValidationError with a JSON-path diagnostic on any malformed or
/// inconsistent field.
RunConfig load_config(const std::string& json_text,
                      const std::string& base_dir = "");

/// load_config on a file's contents; the file's directory becomes the base
/// for "robot_path". Throws ValidationError when the file cannot be read.
RunConfig load_config_file(const std::string& path);

}  // namespace emla
