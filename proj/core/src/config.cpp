#include "emla_sens/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emla_sens/errors.hpp"

namespace emla {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(path + " is missing required key '" + key + "'");
  }
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ValidationError(path + " must be a number");
  }
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback,
                 const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    return fallback;
  }
  return as_number(j.at(key), path + "." + key);
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw ValidationError(path + " must be an integer");
  }
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ValidationError(path + " must be a string");
  }
  return j.get<std::string>();
}

Vector3d as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError(path + " must be an array of 3 numbers");
  }
  Vector3d v;
  for (int i = 0; i < 3; ++i) {
    v[i] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

LossModel parse_loss(const json& j, const std::string& path) {
  LossModel loss;
  loss.iron_hysteresis = number_or(j, "iron_hysteresis", 0.0, path);
  loss.iron_eddy = number_or(j, "iron_eddy", 0.0, path);
  loss.coulomb = number_or(j, "coulomb", 0.0, path);
  loss.viscous = number_or(j, "viscous", 0.0, path);
  return loss;
}

EMLAParams parse_mechanics(const json& j, const std::string& path) {
  EMLAParams p;
  p.screw_lead = as_number(require(j, "screw_lead", path), path + ".screw_lead");
  p.screw_mass = as_number(require(j, "screw_mass", path), path + ".screw_mass");
  p.screw_damping = number_or(j, "screw_damping", 0.0, path);
  p.motor_inertia = number_or(j, "motor_inertia", 0.0, path);
  p.planetary_inertia = number_or(j, "planetary_inertia", 0.0, path);
  p.gear_inertia = number_or(j, "gear_inertia", 0.0, path);
  p.gear_ratio = number_or(j, "gear_ratio", 1.0, path);
  p.planetary_ratio = number_or(j, "planetary_ratio", 1.0, path);
  p.motor_damping = number_or(j, "motor_damping", 0.0, path);
  if (j.is_object() && j.contains("stiffness")) {
    const json& s = j.at("stiffness");
    const std::string sp = path + ".stiffness";
    StiffnessChain chain;
    chain.motor_planetary =
        as_number(require(s, "motor_planetary", sp), sp + ".motor_planetary");
    chain.planetary_gear =
        as_number(require(s, "planetary_gear", sp), sp + ".planetary_gear");
    chain.gear_screw = as_number(require(s, "gear_screw", sp), sp + ".gear_screw");
    chain.load = as_number(require(s, "load", sp), sp + ".load");
    p.stiffness = chain;
  }
  return p;
}

PMSMParams parse_pmsm(const json& j, const std::string& path) {
  PMSMParams m;
  m.stator_resistance = as_number(require(j, "stator_resistance", path),
                                  path + ".stator_resistance");
  m.inductance_d =
      as_number(require(j, "inductance_d", path), path + ".inductance_d");
  m.inductance_q =
      as_number(require(j, "inductance_q", path), path + ".inductance_q");
  m.pole_pairs = as_int(require(j, "pole_pairs", path), path + ".pole_pairs");
  m.pm_flux = as_number(require(j, "pm_flux", path), path + ".pm_flux");
  return m;
}

TrajectorySpec parse_trajectory(const json& j, const std::string& path) {
  TrajectorySpec t;
  const std::string kind = as_string(require(j, "kind", path), path + ".kind");
  if (kind == "spiral") {
    t.kind = TrajectoryKind::spiral;
  } else if (kind == "constant") {
    t.kind = TrajectoryKind::constant;
  } else if (kind == "linear") {
    t.kind = TrajectoryKind::linear;
  } else {
    throw ValidationError(path +
                          ".kind must be 'spiral', 'constant' or 'linear'");
  }
  t.center = as_vec3(require(j, "center", path), path + ".center");
  t.r0 = number_or(j, "r0", 0.0, path);
  t.r1 = number_or(j, "r1", 0.0, path);
  t.omega = number_or(j, "omega", 0.0, path);
  t.z0 = number_or(j, "z0", 0.0, path);
  t.k_z = number_or(j, "k_z", 0.0, path);
  t.duration =
      as_number(require(j, "duration", path), path + ".duration");
  if (j.contains("workspace")) {
    const json& w = j.at("workspace");
    const std::string wp = path + ".workspace";
    WorkspaceBounds b;
    b.lower = as_vec3(require(w, "lower", wp), wp + ".lower");
    b.upper = as_vec3(require(w, "upper", wp), wp + ".upper");
    t.workspace = b;
  }
  return t;
}

SweepSettings parse_sweep(const json& j, const std::string& path) {
  SweepSettings s;
  s.m_min = as_number(require(j, "m_min", path), path + ".m_min");
  s.m_max = as_number(require(j, "m_max", path), path + ".m_max");
  s.n_points = as_int(require(j, "n_points", path), path + ".n_points");
  s.delta_m = number_or(j, "delta_m", 1e-4, path);
  s.dt = as_number(require(j, "dt", path), path + ".dt");
  if (j.contains("scheme")) {
    const std::string scheme =
        as_string(j.at("scheme"), path + ".scheme");
    if (scheme == "central") {
      s.scheme = FdScheme::central;
    } else if (scheme == "forward") {
      s.scheme = FdScheme::forward;
    } else {
      throw ValidationError(path + ".scheme must be 'central' or 'forward'");
    }
  }
  return s;
}

}  // namespace

RunConfig load_config(const std::string& json_text,
                      const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("config root must be a JSON object");
  }

  RunConfig cfg;
  if (doc.contains("robot") && doc.contains("robot_path")) {
    throw ValidationError("config has both 'robot' and 'robot_path'; use one");
  }
  if (doc.contains("robot")) {
    cfg.robot = load_model(doc.at("robot").dump());
  } else if (doc.contains("robot_path")) {
    std::filesystem::path p =
        as_string(doc.at("robot_path"), "config.robot_path");
    if (p.is_relative() && !base_dir.empty()) {
      p = std::filesystem::path(base_dir) / p;
    }
    std::ifstream in(p);
    if (!in) {
      throw ValidationError("config.robot_path: cannot read '" + p.string() +
                            "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    cfg.robot = load_model(text.str());
  } else {
    throw ValidationError("config needs either 'robot' or 'robot_path'");
  }

  const json& actuators = require(doc, "actuators", "config");
  if (!actuators.is_array() || actuators.empty()) {
    throw ValidationError("config.actuators must be a non-empty array");
  }
  if (actuators.size() != cfg.robot.joints.size()) {
    throw ValidationError(
        "config.actuators has " + std::to_string(actuators.size()) +
        " entries for a robot with " +
        std::to_string(cfg.robot.joints.size()) + " joints");
  }
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    const std::string path = "config.actuators[" + std::to_string(i) + "]";
    const json& a = actuators[i];
    ActuatorParams params;
    params.mechanics =
        parse_mechanics(require(a, "mechanics", path), path + ".mechanics");
    params.mechanics.loss =
        a.is_object() && a.contains("loss")
            ? parse_loss(a.at("loss"), path + ".loss")
            : LossModel{};
    params.motor = parse_pmsm(require(a, "pmsm", path), path + ".pmsm");
    validate(params, path);
    cfg.actuators.push_back(params);
  }

  cfg.trajectory = parse_trajectory(require(doc, "trajectory", "config"),
                                    "config.trajectory");
  validate(cfg.trajectory);
  cfg.sweep = parse_sweep(require(doc, "sweep", "config"), "config.sweep");
  cfg.robot.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot read config file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str(),
                     std::filesystem::path(path).parent_path().string());
}

}  // namespace emla
