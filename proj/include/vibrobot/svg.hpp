#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vibrobot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Self-contained SVG line chart: axes with ticks, one polyline per series,
/// legend. Output depends only on the data, so it is byte-stable.
std::string render_svg(const Plot& plot, int width = 720, int height = 420);

void write_svg(const std::filesystem::path& path, const Plot& plot);

}  // namespace vibrobot
