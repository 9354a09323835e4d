#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace blab {

using Json = nlohmann::json;

/// Writes JSON with sorted keys and a trailing newline; throws on I/O errors.
void write_json(const std::string& path, const Json& j);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::string& path, const CsvTable& table);

/// One polyline per series, shared axes, log-log optional.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_x = false,
                    bool log_y = false);

void ensure_dir(const std::string& path);

}  // namespace blab
