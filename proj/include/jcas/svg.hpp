// Self-contained SVG line charts for the result tables.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace jcas {

struct PlotSeries {
  std::vector<double> x, y;
  std::string label;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  int width = 640, height = 420;
};

// Renders line charts with markers and a legend. Throws on empty series or on
// non-positive data under a log axis.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);
void write_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec,
               const std::filesystem::path& path);

}  // namespace jcas
