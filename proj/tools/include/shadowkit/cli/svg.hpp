#pragma once

#include <string>
#include <vector>

namespace shadowkit::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Fixed axis ranges; when lo == hi the range is taken from the data.
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

/// Self-contained SVG line chart. Series with a single point are drawn as a
/// marker. Non-finite points are skipped.
std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace shadowkit::cli
