#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "emla_sens/errors.hpp"
#include "emla_sens/metrics.hpp"
#include "emla_sens/report.hpp"
#include "support/models.hpp"

using namespace emla;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("emla_report_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  const fs::path& root() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  static int counter_;
  fs::path dir_;
};

int TempDir::counter_ = 0;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.push_back("");
  }
  return fields;
}

ActuatorParams moving_drive() {
  ActuatorParams a;
  a.mechanics.screw_lead = 0.01;
  a.mechanics.screw_mass = 5.0;
  a.motor.stator_resistance = 0.05;
  a.motor.inductance_d = 1.2e-3;
  a.motor.inductance_q = 1.2e-3;
  a.motor.pole_pairs = 4;
  a.motor.pm_flux = 0.18;
  return a;
}

/// A small real sweep on the one-joint lift: constant climb, 3 payloads.
SensitivityReport lift_report() {
  TrajectorySpec t;
  t.kind = TrajectoryKind::linear;
  t.center = Vector3d::Zero();
  t.k_z = 0.05;
  t.duration = 0.5;
  SweepSettings s;
  s.m_min = 0.0;
  s.m_max = 5.0;
  s.n_points = 3;
  s.delta_m = 1e-4;
  s.scheme = FdScheme::central;
  s.dt = 0.1;
  return payload_sweep(emla::testing::vertical_lift(), t, {moving_drive()}, s);
}

/// Same sweep but holding still: every sample stands at zero velocity, so
/// every conversion entry is undefined.
SensitivityReport hold_report() {
  TrajectorySpec t;
  t.kind = TrajectoryKind::constant;
  t.center = Vector3d::Zero();
  t.duration = 0.5;
  SweepSettings s;
  s.m_min = 0.0;
  s.m_max = 5.0;
  s.n_points = 3;
  s.delta_m = 1e-4;
  s.scheme = FdScheme::central;
  s.dt = 0.1;
  return payload_sweep(emla::testing::vertical_lift(), t, {moving_drive()}, s);
}

}  // namespace

TEST_CASE("report files land in the output directory with exact headers") {
  TempDir dir;
  const SensitivityReport report = lift_report();
  ReportOptions opts;
  opts.out_dir = dir.root().string();
  const std::vector<std::string> written = write_report(report, opts);

  // 3 per-payload metric files + sensitivity.csv + summary.json.
  CHECK(written.size() == 5);
  CHECK(fs::exists(dir.path("metrics_0.csv")));
  CHECK(fs::exists(dir.path("metrics_2.5.csv")));
  CHECK(fs::exists(dir.path("metrics_5.csv")));
  CHECK(fs::exists(dir.path("sensitivity.csv")));
  CHECK(fs::exists(dir.path("summary.json")));

  const auto sens = lines_of(slurp(dir.path("sensitivity.csv")));
  REQUIRE(!sens.empty());
  CHECK(sens[0] ==
        "t,payload,actuator,v_x,f_x,psi1,psi2,psi3_cum,psi4,"
        "d_psi1_dm,d_psi2_dm,d_psi3_dm,d_psi4_dm");
  // 3 payloads x 6 samples x 1 actuator.
  CHECK(sens.size() == 1 + 3 * 6);

  const auto metrics = lines_of(slurp(dir.path("metrics_2.5.csv")));
  CHECK(metrics[0] == "t,actuator,v_x,f_x,psi1,psi2,psi3_cum,psi4");
  CHECK(metrics.size() == 1 + 6);
}

TEST_CASE("csv numbers round-trip the exact doubles") {
  TempDir dir;
  const SensitivityReport report = lift_report();
  ReportOptions opts;
  opts.out_dir = dir.root().string();
  write_report(report, opts);

  const auto lines = lines_of(slurp(dir.path("sensitivity.csv")));
  // Second payload block, third sample: row 1 + 1*6 + 2.
  const auto fields = split_csv(lines[1 + 6 + 2]);
  REQUIRE(fields.size() == 13);
  const PayloadRecord& r = report.records[1];
  CHECK(std::strtod(fields[0].c_str(), nullptr) == r.metrics.time[2]);
  CHECK(std::strtod(fields[1].c_str(), nullptr) == r.payload);
  CHECK(fields[2] == "lift");
  CHECK(std::strtod(fields[3].c_str(), nullptr) == r.metrics.velocity[0][2]);
  CHECK(std::strtod(fields[4].c_str(), nullptr) == r.metrics.force[0][2]);
  CHECK(std::strtod(fields[5].c_str(), nullptr) == r.metrics.power[0][2]);
  CHECK(std::strtod(fields[6].c_str(), nullptr) == r.metrics.force[0][2]);
  CHECK(std::strtod(fields[7].c_str(), nullptr) == r.metrics.energy[0][2]);
  CHECK(std::strtod(fields[10].c_str(), nullptr) ==
        r.partials.d_force[0][2]);
}

TEST_CASE("undefined conversion entries become empty csv fields") {
  TempDir dir;
  const SensitivityReport report = hold_report();
  ReportOptions opts;
  opts.out_dir = dir.root().string();
  write_report(report, opts);

  const auto lines = lines_of(slurp(dir.path("sensitivity.csv")));
  int empty_psi4 = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv(lines[i]);
    REQUIRE(fields.size() == 13);
    if (fields[8].empty()) {
      ++empty_psi4;
      CHECK(fields[12].empty());
    }
  }
  int expected = 0;
  for (const PayloadRecord& r : report.records) {
    expected += r.metrics.undefined_conversion_count[0];
  }
  // Holding still leaves every sample without a conversion ratio.
  CHECK(expected == 3 * 6);
  CHECK(empty_psi4 == expected);

  // The moving run defines every entry; no field may be blank there.
  TempDir moving;
  write_report(lift_report(), {moving.root().string(), ReportFormat::csv});
  const auto moving_lines = lines_of(slurp(moving.path("sensitivity.csv")));
  for (std::size_t i = 1; i < moving_lines.size(); ++i) {
    CHECK_FALSE(split_csv(moving_lines[i])[8].empty());
  }
}

TEST_CASE("summary aggregates energies and peaks per payload and actuator") {
  TempDir dir;
  const SensitivityReport report = lift_report();
  ReportOptions opts;
  opts.out_dir = dir.root().string();
  write_report(report, opts);

  const nlohmann::json summary =
      nlohmann::json::parse(slurp(dir.path("summary.json")));
  CHECK(summary["actuators"] == nlohmann::json::array({"lift"}));
  CHECK(summary["scheme"] == "central");
  CHECK(summary["n_payloads"] == 3);
  CHECK(summary["n_samples"] == 6);
  CHECK(summary["dt"] == 0.1);
  REQUIRE(summary["payloads"].size() == 3);
  const auto& entry = summary["payloads"][2];
  CHECK(entry["payload"] == 5.0);
  const auto& act = entry["per_actuator"][0];
  CHECK(act["name"] == "lift");
  const MetricsSeries& m = report.records[2].metrics;
  CHECK(act["energy"].get<double>() == m.energy[0].back());
  double peak_force = 0.0;
  for (double f : m.force[0]) {
    peak_force = std::max(peak_force, std::abs(f));
  }
  CHECK(act["peak_force"].get<double>() == peak_force);
  CHECK(act["undefined_psi4_samples"].get<int>() ==
        m.undefined_conversion_count[0]);
}

TEST_CASE("report bytes are identical across writes") {
  TempDir a;
  TempDir b;
  const SensitivityReport report = lift_report();
  write_report(report, {a.root().string(), ReportFormat::csv});
  write_report(report, {b.root().string(), ReportFormat::csv});
  for (const char* name :
       {"metrics_0.csv", "metrics_2.5.csv", "metrics_5.csv", "sensitivity.csv",
        "summary.json"}) {
    CHECK(slurp(a.path(name)) == slurp(b.path(name)));
  }
}

TEST_CASE("json format mirrors the csv content") {
  TempDir dir;
  const SensitivityReport report = lift_report();
  ReportOptions opts;
  opts.out_dir = dir.root().string();
  opts.format = ReportFormat::json;
  const auto written = write_report(report, opts);
  CHECK(written.size() == 5);
  CHECK(fs::exists(dir.path("sensitivity.json")));
  CHECK(fs::exists(dir.path("metrics_5.json")));
  CHECK_FALSE(fs::exists(dir.path("sensitivity.csv")));

  const nlohmann::json sens =
      nlohmann::json::parse(slurp(dir.path("sensitivity.json")));
  REQUIRE(sens["columns"].size() == 13);
  CHECK(sens["columns"][8] == "psi4");
  CHECK(sens["rows"].size() == 3 * 6);
  const auto& row = sens["rows"][0];
  REQUIRE(row.size() == 13);
  CHECK(row[1] == 0.0);
  CHECK(row[2] == "lift");
  CHECK(row[8].is_number());

  const nlohmann::json metrics =
      nlohmann::json::parse(slurp(dir.path("metrics_5.json")));
  CHECK(metrics["payload"] == 5.0);
  CHECK(metrics["rows"].size() == 6);

  // Undefined conversion entries serialize as nulls.
  TempDir hold;
  write_report(hold_report(), {hold.root().string(), ReportFormat::json});
  const nlohmann::json held =
      nlohmann::json::parse(slurp(hold.path("sensitivity.json")));
  CHECK(held["rows"][0][8].is_null());
  CHECK(held["rows"][0][12].is_null());
}

TEST_CASE("an empty report still yields a parseable skeleton") {
  TempDir dir;
  SensitivityReport report;
  report.dt = 0.1;
  report.delta_m = 1e-4;
  const auto written = write_report(report, {dir.root().string()});
  CHECK(written.size() == 2);
  const auto lines = lines_of(slurp(dir.path("sensitivity.csv")));
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].substr(0, 2) == "t,");
  const nlohmann::json summary =
      nlohmann::json::parse(slurp(dir.path("summary.json")));
  CHECK(summary["n_payloads"] == 0);
}

TEST_CASE("plots render one value and one partial panel per actuator") {
  TempDir dir;
  const SensitivityReport report = lift_report();
  const auto written = emit_plots(report, dir.root().string());
  CHECK(written.size() == 4);
  for (const char* name :
       {"power.svg", "force.svg", "energy.svg", "efficiency.svg"}) {
    const std::string svg = slurp(dir.path(name));
    CHECK(svg.substr(0, 4) == "<svg");
    CHECK(svg.find("lift [") != std::string::npos);
    CHECK(svg.find("lift d/dm [") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("t [s]") != std::string::npos);
  }
  CHECK(slurp(dir.path("power.svg")).find("[W]") != std::string::npos);
  CHECK(slurp(dir.path("force.svg")).find("[N]") != std::string::npos);
  CHECK(slurp(dir.path("energy.svg")).find("[J]") != std::string::npos);
  CHECK(slurp(dir.path("power.svg")).find("payload 5 kg") !=
        std::string::npos);
}

TEST_CASE("plot bytes are deterministic") {
  TempDir a;
  TempDir b;
  const SensitivityReport report = lift_report();
  emit_plots(report, a.root().string());
  emit_plots(report, b.root().string());
  for (const char* name :
       {"power.svg", "force.svg", "energy.svg", "efficiency.svg"}) {
    CHECK(slurp(a.path(name)) == slurp(b.path(name)));
  }
}

TEST_CASE("a single-payload report notes the omitted partial panels") {
  TempDir dir;
  SensitivityReport report = lift_report();
  report.records.erase(report.records.begin() + 1, report.records.end());
  report.payload_grid.resize(1);
  emit_plots(report, dir.root().string());
  const std::string svg = slurp(dir.path("power.svg"));
  CHECK(svg.find("partial-derivative panels omitted") != std::string::npos);
  CHECK(svg.find("d/dm") == std::string::npos);
}

TEST_CASE("unwritable plot directories raise without leftovers") {
  const SensitivityReport report = lift_report();
  CHECK_THROWS_AS(emit_plots(report, "/proc/no_such_dir/x"), ValidationError);
  SensitivityReport empty;
  CHECK_THROWS_AS(emit_plots(empty, "/tmp"), ValidationError);
}
