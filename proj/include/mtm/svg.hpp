#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mtm {

struct Series
{
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct ChartLabels
{
  std::string title;
  std::string x_axis;
  std::string y_axis;
};

/// Standalone 800x600 SVG line chart with axes and a legend. Output depends only on the
/// data, so identical input gives identical bytes.
std::string render_svg(const std::vector<Series>& series, const ChartLabels& labels);

/// Renders and writes the chart. Throws InvalidConfiguration on empty data (nothing is
/// written) and Error when the path cannot be written.
void emit_svg(const std::vector<Series>& series, const ChartLabels& labels, const std::filesystem::path& path);

} // namespace mtm
