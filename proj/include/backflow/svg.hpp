#pragma once

// Minimal hand-emitted SVG line plots: axes, tick labels at the range
// extremes, one polyline per series and a small legend. CSV remains the
// canonical output; this is a convenience rendering with no dependencies.

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "backflow/csv.hpp"
#include "backflow/errors.hpp"

namespace backflow {

struct PlotSeries {
  std::string name;
  std::string color;  // any SVG color string
  std::vector<std::pair<double, double>> points;
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::vector<PlotSeries>& series) {
  if (series.empty()) throw ConfigError("svg: nothing to plot");
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (!(x_min < x_max)) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (!(y_min < y_max)) {
    y_min -= 0.5;
    y_max += 0.5;
  }

  const double W = 640.0, H = 480.0, ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
  const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (W - ml - mr); };
  const auto py = [&](double y) { return H - mb - (y - y_min) / (y_max - y_min) * (H - mt - mb); };

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("svg: cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << H - mb + 18 << "\" font-size=\"11\">"
      << format_number(x_min) << "</text>\n";
  out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 18
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(x_max) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(y_min) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(y_max) << "</text>\n";

  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) out << format_number(px(x)) << ',' << format_number(py(y)) << ' ';
    out << "\"/>\n";
  }
  // legend
  double ly = mt + 10.0;
  for (const auto& s : series) {
    out << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 120
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - mr - 114 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << s.name
        << "</text>\n";
    ly += 18.0;
  }
  out << "</svg>\n";
}

}  // namespace backflow
