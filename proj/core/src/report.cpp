#include "emla_sens/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emla_sens/errors.hpp"

namespace emla {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Compact form for file names and labels.
std::string short_digits(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

const char* scheme_name(FdScheme s) {
  return s == FdScheme::central ? "central" : "forward";
}

/// Collects files as they are written so a failure can undo all of them.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      throw ValidationError("cannot create output directory '" +
                            dir_.string() + "': " + ec.message());
    }
  }

  fs::path claim(const std::string& name) {
    fs::path p = dir_ / name;
    written_.push_back(p.string());
    return p;
  }

  void store(const std::string& name, const std::string& content) {
    const fs::path p = claim(name);
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      throw ValidationError("failed to write '" + p.string() + "'");
    }
  }

  void discard_all() {
    for (const std::string& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  std::vector<std::string> take() { return std::move(written_); }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

/// 17 significant digits round-trip every finite double exactly.
void append_field(std::string& row, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

std::string metrics_csv(const SensitivityReport& report,
                        const PayloadRecord& record) {
  std::string out = "t,actuator,v_x,f_x,psi1,psi2,psi3_cum,psi4\n";
  const MetricsSeries& m = record.metrics;
  std::string row;
  for (int k = 0; k < m.sample_count(); ++k) {
    for (int a = 0; a < m.actuator_count(); ++a) {
      row.clear();
      append_field(row, m.time[k]);
      row += ',';
      row += report.actuator_names[a];
      row += ',';
      append_field(row, m.velocity[a][k]);
      row += ',';
      append_field(row, m.force[a][k]);
      row += ',';
      append_field(row, m.power[a][k]);
      row += ',';
      append_field(row, m.force[a][k]);
      row += ',';
      append_field(row, m.energy[a][k]);
      row += ',';
      if (m.conversion_defined[a][k]) {
        append_field(row, m.conversion[a][k]);
      }
      row += '\n';
      out += row;
    }
  }
  return out;
}

std::string sensitivity_csv(const SensitivityReport& report) {
  std::string out =
      "t,payload,actuator,v_x,f_x,psi1,psi2,psi3_cum,psi4,"
      "d_psi1_dm,d_psi2_dm,d_psi3_dm,d_psi4_dm\n";
  std::string row;
  for (const PayloadRecord& record : report.records) {
    const MetricsSeries& m = record.metrics;
    const SensitivityEntry& d = record.partials;
    for (int k = 0; k < m.sample_count(); ++k) {
      for (int a = 0; a < m.actuator_count(); ++a) {
        row.clear();
        append_field(row, m.time[k]);
        row += ',';
        append_field(row, record.payload);
        row += ',';
        row += report.actuator_names[a];
        row += ',';
        append_field(row, m.velocity[a][k]);
        row += ',';
        append_field(row, m.force[a][k]);
        row += ',';
        append_field(row, m.power[a][k]);
        row += ',';
        append_field(row, m.force[a][k]);
        row += ',';
        append_field(row, m.energy[a][k]);
        row += ',';
        if (m.conversion_defined[a][k]) {
          append_field(row, m.conversion[a][k]);
        }
        row += ',';
        append_field(row, d.d_power[a][k]);
        row += ',';
        append_field(row, d.d_force[a][k]);
        row += ',';
        append_field(row, d.d_energy[a][k]);
        row += ',';
        if (d.d_conversion_defined[a][k]) {
          append_field(row, d.d_conversion[a][k]);
        }
        row += '\n';
        out += row;
      }
    }
  }
  return out;
}

ordered_json metrics_rows_json(const SensitivityReport& report,
                               const PayloadRecord& record) {
  ordered_json rows = ordered_json::array();
  const MetricsSeries& m = record.metrics;
  for (int k = 0; k < m.sample_count(); ++k) {
    for (int a = 0; a < m.actuator_count(); ++a) {
      ordered_json row = ordered_json::array(
          {m.time[k], report.actuator_names[a], m.velocity[a][k],
           m.force[a][k], m.power[a][k], m.force[a][k], m.energy[a][k]});
      if (m.conversion_defined[a][k]) {
        row.push_back(m.conversion[a][k]);
      } else {
        row.push_back(nullptr);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string metrics_json(const SensitivityReport& report,
                         const PayloadRecord& record) {
  ordered_json doc;
  doc["payload"] = record.payload;
  doc["columns"] = {"t",    "actuator", "v_x",      "f_x",
                    "psi1", "psi2",     "psi3_cum", "psi4"};
  doc["rows"] = metrics_rows_json(report, record);
  return doc.dump(2) + "\n";
}

std::string sensitivity_json(const SensitivityReport& report) {
  ordered_json doc;
  doc["columns"] = {"t",        "payload",   "actuator",  "v_x",
                    "f_x",      "psi1",      "psi2",      "psi3_cum",
                    "psi4",     "d_psi1_dm", "d_psi2_dm", "d_psi3_dm",
                    "d_psi4_dm"};
  ordered_json rows = ordered_json::array();
  for (const PayloadRecord& record : report.records) {
    const MetricsSeries& m = record.metrics;
    const SensitivityEntry& d = record.partials;
    for (int k = 0; k < m.sample_count(); ++k) {
      for (int a = 0; a < m.actuator_count(); ++a) {
        ordered_json row = ordered_json::array(
            {m.time[k], record.payload, report.actuator_names[a],
             m.velocity[a][k], m.force[a][k], m.power[a][k], m.force[a][k],
             m.energy[a][k]});
        if (m.conversion_defined[a][k]) {
          row.push_back(m.conversion[a][k]);
        } else {
          row.push_back(nullptr);
        }
        row.push_back(d.d_power[a][k]);
        row.push_back(d.d_force[a][k]);
        row.push_back(d.d_energy[a][k]);
        if (d.d_conversion_defined[a][k]) {
          row.push_back(d.d_conversion[a][k]);
        } else {
          row.push_back(nullptr);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string summary_json(const SensitivityReport& report) {
  ordered_json doc;
  doc["actuators"] = report.actuator_names;
  doc["scheme"] = scheme_name(report.scheme);
  doc["dt"] = report.dt;
  doc["delta_m"] = report.delta_m;
  doc["n_payloads"] = report.records.size();
  doc["n_samples"] =
      report.records.empty() ? 0 : report.records.front().metrics.sample_count();
  ordered_json payloads = ordered_json::array();
  for (const PayloadRecord& record : report.records) {
    const MetricsSeries& m = record.metrics;
    ordered_json entry;
    entry["payload"] = record.payload;
    ordered_json per_actuator = ordered_json::array();
    for (int a = 0; a < m.actuator_count(); ++a) {
      double peak_force = 0.0;
      double peak_power = 0.0;
      for (int k = 0; k < m.sample_count(); ++k) {
        peak_force = std::max(peak_force, std::abs(m.force[a][k]));
        peak_power = std::max(peak_power, std::abs(m.power[a][k]));
      }
      ordered_json item;
      item["name"] = report.actuator_names[a];
      item["energy"] = m.sample_count() > 0 ? m.energy[a].back() : 0.0;
      item["peak_force"] = peak_force;
      item["peak_power"] = peak_power;
      item["undefined_psi4_samples"] = m.undefined_conversion_count[a];
      per_actuator.push_back(std::move(item));
    }
    entry["per_actuator"] = std::move(per_actuator);
    payloads.push_back(std::move(entry));
  }
  doc["payloads"] = std::move(payloads);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// SVG rendering

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct PanelFrame {
  double x0 = 0.0;
  double y0 = 0.0;  // top-left of the plot area
  double width = 350.0;
  double height = 170.0;
};

struct Curve {
  const std::vector<double>* time = nullptr;
  const std::vector<double>* value = nullptr;
  const std::vector<bool>* defined = nullptr;  // optional mask
};

bool sample_defined(const Curve& c, int k) {
  if (c.defined != nullptr && !(*c.defined)[k]) {
    return false;
  }
  return std::isfinite((*c.value)[k]);
}

void render_panel(std::ostringstream& svg, const PanelFrame& f,
                  const std::string& title, const std::string& color,
                  const Curve& curve) {
  svg << "<rect x=\"" << px(f.x0) << "\" y=\"" << px(f.y0) << "\" width=\""
      << px(f.width) << "\" height=\"" << px(f.height)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << px(f.x0) << "\" y=\"" << px(f.y0 - 8.0)
      << "\" font-size=\"13\" fill=\"#222222\">" << title << "</text>\n";

  const int n = curve.time ? static_cast<int>(curve.time->size()) : 0;
  double t_end = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  bool any = false;
  for (int k = 0; k < n; ++k) {
    if (!sample_defined(curve, k)) {
      continue;
    }
    const double v = (*curve.value)[k];
    if (!any) {
      y_min = y_max = v;
      any = true;
    } else {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (n > 0) {
    t_end = curve.time->back();
  }
  if (!any) {
    svg << "<text x=\"" << px(f.x0 + f.width / 2.0 - 60.0) << "\" y=\""
        << px(f.y0 + f.height / 2.0)
        << "\" font-size=\"12\" fill=\"#888888\">no defined samples</text>\n";
    return;
  }
  double span = y_max - y_min;
  const double pad =
      span > 0.0 ? 0.05 * span : std::max(0.5, std::abs(y_max) * 0.05);
  y_min -= pad;
  y_max += pad;
  span = y_max - y_min;
  if (t_end <= 0.0) {
    t_end = 1.0;
  }

  const auto map_x = [&](double t) { return f.x0 + t / t_end * f.width; };
  const auto map_y = [&](double v) {
    return f.y0 + f.height - (v - y_min) / span * f.height;
  };

  for (int i = 0; i <= 4; ++i) {
    const double t = t_end * i / 4.0;
    const double x = map_x(t);
    svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(f.y0) << "\" x2=\""
        << px(x) << "\" y2=\"" << px(f.y0 + f.height)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << px(x - 10.0) << "\" y=\""
        << px(f.y0 + f.height + 16.0) << "\" font-size=\"11\" fill=\"#333333\">"
        << tick_label(t) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + span * i / 4.0;
    const double y = map_y(v);
    svg << "<line x1=\"" << px(f.x0) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(f.x0 + f.width) << "\" y2=\"" << px(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << px(f.x0 - 58.0) << "\" y=\"" << px(y + 4.0)
        << "\" font-size=\"11\" fill=\"#333333\">" << tick_label(v)
        << "</text>\n";
  }
  svg << "<text x=\"" << px(f.x0 + f.width / 2.0 - 12.0) << "\" y=\""
      << px(f.y0 + f.height + 32.0)
      << "\" font-size=\"11\" fill=\"#333333\">t [s]</text>\n";

  // NaN or undefined samples split the trace into separate segments.
  std::string points;
  const auto flush = [&]() {
    if (!points.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
      points.clear();
    }
  };
  for (int k = 0; k < n; ++k) {
    if (!sample_defined(curve, k)) {
      flush();
      continue;
    }
    if (!points.empty()) {
      points += ' ';
    }
    points += px(map_x((*curve.time)[k]));
    points += ',';
    points += px(map_y((*curve.value)[k]));
  }
  flush();
}

struct FigureSpec {
  std::string file;
  std::string title;
  std::string unit;
  std::string pd_unit;
  // Accessors into a record, per actuator index.
  const std::vector<std::vector<double>>* values = nullptr;
  const std::vector<std::vector<bool>>* value_mask = nullptr;
  const std::vector<std::vector<double>>* partials = nullptr;
  const std::vector<std::vector<bool>>* partial_mask = nullptr;
};

std::string render_figure(const SensitivityReport& report,
                          const FigureSpec& fig) {
  const PayloadRecord& record = report.records.back();
  const MetricsSeries& m = record.metrics;
  const int n_act = m.actuator_count();
  const bool with_partials = report.records.size() > 1;

  const double col_width = 430.0;
  const double row_height = 240.0;
  const double width = with_partials ? 70.0 + 2.0 * col_width : 70.0 + col_width;
  const double height = 70.0 + std::max(1, n_act) * row_height;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width)
      << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(width) << " "
      << px(height)
      << "\" font-family=\"Helvetica,Arial,sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"20\" y=\"26\" font-size=\"16\" fill=\"#111111\">"
      << fig.title << " at payload " << short_digits(record.payload)
      << " kg</text>\n";
  if (!with_partials) {
    svg << "<text x=\"20\" y=\"44\" font-size=\"12\" fill=\"#666666\">"
        << "partial-derivative panels omitted: the report holds a single "
           "payload</text>\n";
  }

  for (int a = 0; a < n_act; ++a) {
    const std::string color = kPalette[a % 6];
    PanelFrame value_frame;
    value_frame.x0 = 70.0;
    value_frame.y0 = 70.0 + a * row_height;
    Curve value;
    value.time = &m.time;
    value.value = &(*fig.values)[a];
    value.defined = fig.value_mask ? &(*fig.value_mask)[a] : nullptr;
    render_panel(svg, value_frame,
                 report.actuator_names[a] + " [" + fig.unit + "]", color,
                 value);
    if (with_partials) {
      PanelFrame pd_frame = value_frame;
      pd_frame.x0 += col_width;
      Curve pd;
      pd.time = &m.time;
      pd.value = &(*fig.partials)[a];
      pd.defined = fig.partial_mask ? &(*fig.partial_mask)[a] : nullptr;
      render_panel(svg, pd_frame,
                   report.actuator_names[a] + " d/dm [" + fig.pd_unit + "]",
                   color, pd);
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> write_report(const SensitivityReport& report,
                                      const ReportOptions& options) {
  OutputSet out(options.out_dir);
  try {
    const bool csv = options.format == ReportFormat::csv;
    for (const PayloadRecord& record : report.records) {
      const std::string name =
          "metrics_" + short_digits(record.payload) + (csv ? ".csv" : ".json");
      out.store(name, csv ? metrics_csv(report, record)
                          : metrics_json(report, record));
    }
    out.store(csv ? "sensitivity.csv" : "sensitivity.json",
              csv ? sensitivity_csv(report) : sensitivity_json(report));
    out.store("summary.json", summary_json(report));
  } catch (...) {
    out.discard_all();
    throw;
  }
  return out.take();
}

std::vector<std::string> emit_plots(const SensitivityReport& report,
                                    const std::string& out_dir) {
  if (report.records.empty()) {
    throw ValidationError("emit_plots needs at least one payload record");
  }
  const PayloadRecord& record = report.records.back();
  const SensitivityEntry& d = record.partials;

  std::vector<FigureSpec> figures(4);
  figures[0] = {"power.svg",      "Delivered power",
                "W",              "W/kg",
                &record.metrics.power, nullptr,
                &d.d_power,       nullptr};
  figures[1] = {"force.svg",      "Stroke force",
                "N",              "N/kg",
                &record.metrics.force, nullptr,
                &d.d_force,       nullptr};
  figures[2] = {"energy.svg",     "Consumed energy",
                "J",              "J/kg",
                &record.metrics.energy, nullptr,
                &d.d_energy,      nullptr};
  figures[3] = {"efficiency.svg", "Conversion efficiency",
                "-",              "1/kg",
                &record.metrics.conversion, &record.metrics.conversion_defined,
                &d.d_conversion,  &d.d_conversion_defined};

  OutputSet out(out_dir);
  try {
    for (const FigureSpec& fig : figures) {
      out.store(fig.file, render_figure(report, fig));
    }
  } catch (...) {
    out.discard_all();
    throw;
  }
  return out.take();
}

}  // namespace emla
