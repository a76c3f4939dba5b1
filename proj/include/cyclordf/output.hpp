#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace cyclordf {

struct SweepResult;
struct GateReport;
struct RdfPoint;

/// Shortest round-trip decimal form, independent of the C/C++ locale.
/// NaN prints as "nan", infinities as "inf"/"-inf".
std::string format_double(double v);

/// Sweep CSV. Columns by axis:
///   n:   n,p_n,epsilon_n,phi_opt,R,theta     (phi_opt as a fraction of T_c)
///   phi: phi_tilde,R,theta
///   D:   D,R,theta
/// Failed points carry "nan" in R and theta.
void write_sweep_csv(const SweepResult& result, double period, std::ostream& out);

nlohmann::json gate_report_json(const GateReport& gate);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line plot, one polyline per series, with axes, ticks
/// and a legend. NaN points break the polyline.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace cyclordf
