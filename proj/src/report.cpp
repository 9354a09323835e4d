#include "blab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace blab {

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path);
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < table.columns.size(); ++i)
    out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "\n");
  out << std::setprecision(17);
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_x,
                    bool log_y) {
  const int W = 640, H = 420, ML = 70, MR = 20, MT = 40, MB = 50;
  auto txf = [&](double v) { return log_x ? std::log10(std::abs(v)) : v; };
  auto tyf = [&](double v) { return log_y ? std::log10(std::abs(v)) : v; };
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && s.y[i] == 0.0) continue;
      xmin = std::min(xmin, txf(s.x[i]));
      xmax = std::max(xmax, txf(s.x[i]));
      ymin = std::min(ymin, tyf(s.y[i]));
      ymax = std::max(ymax, tyf(s.y[i]));
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) {
    return ML + (txf(v) - xmin) / (xmax - xmin) * (W - ML - MR);
  };
  auto py = [&](double v) {
    return H - MB - (tyf(v) - ymin) / (ymax - ymin) * (H - MT - MB);
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
      << H << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << W / 2 << "' y='20' text-anchor='middle' "
      << "font-family='sans-serif' font-size='14'>" << title << "</text>\n";
  svg << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR
      << "' y2='" << H - MB << "' stroke='black'/>\n";
  svg << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='"
      << H - MB << "' stroke='black'/>\n";
  svg << std::setprecision(10);
  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = xmin + tick / 4.0 * (xmax - xmin);
    const double fy = ymin + tick / 4.0 * (ymax - ymin);
    svg << "<text x='" << ML + tick / 4.0 * (W - ML - MR) << "' y='"
        << H - MB + 18 << "' text-anchor='middle' font-size='10' "
        << "font-family='sans-serif'>" << std::setprecision(3) << fx
        << (log_x ? " (lg)" : "") << "</text>\n";
    svg << "<text x='" << ML - 6 << "' y='"
        << H - MB - tick / 4.0 * (H - MT - MB) + 4
        << "' text-anchor='end' font-size='10' font-family='sans-serif'>"
        << std::setprecision(3) << fy << (log_y ? " (lg)" : "") << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    svg << "<polyline fill='none' stroke='" << colors[ci % 5]
        << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && s.y[i] == 0.0) continue;
      svg << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    svg << "'/>\n";
    svg << "<text x='" << W - MR - 5 << "' y='" << MT + 14 * (ci + 1)
        << "' text-anchor='end' font-size='11' font-family='sans-serif' fill='"
        << colors[ci % 5] << "'>" << s.label << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace blab
