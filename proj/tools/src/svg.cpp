#include "shadowkit/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace shadowkit::cli {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string tick_label(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return b;
}

void data_range(const std::vector<Series>& series, bool x_axis, double& lo, double& hi) {
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const auto& s : series) {
    for (double v : x_axis ? s.x : s.y) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) {
    const double pad = std::max(1e-3, std::abs(lo) * 0.05);
    lo -= pad;
    hi += pad;
  }
}

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  double x0 = spec.x_lo, x1 = spec.x_hi, y0 = spec.y_lo, y1 = spec.y_hi;
  if (x0 == x1) data_range(series, true, x0, x1);
  if (y0 == y1) data_range(series, false, y0, y1);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + escape(spec.title) + "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double fx = x0 + (x1 - x0) * i / 5.0, fy = y0 + (y1 - y0) * i / 5.0;
    s += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(fx)) + "\" y2=\"" +
         num(kTop + ph) + "\" stroke=\"#e0e0e0\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(py(fy)) + "\" stroke=\"#e0e0e0\"/>\n";
    s += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(fx) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(fy) + 4) + "\" text-anchor=\"end\">" +
         tick_label(fy) + "</text>\n";
  }
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
       num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) + "\" text-anchor=\"middle\">" +
       escape(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    const char* colour = kColours[k % std::size(kColours)];
    std::string points;
    std::size_t n = 0;
    double lx = 0, ly = 0;
    for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
      lx = px(std::clamp(sr.x[i], x0, x1));
      ly = py(std::clamp(sr.y[i], y0, y1));
      points += num(lx) + "," + num(ly) + " ";
      ++n;
    }
    if (n == 1) {
      s += "<circle cx=\"" + num(lx) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"" + colour + "\"/>\n";
    } else if (n > 1) {
      points.pop_back();
      s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" +
           points + "\"/>\n";
    }
    const double ly_legend = kTop + 16 + 16.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(kLeft + pw - 150) + "\" y1=\"" + num(ly_legend - 4) + "\" x2=\"" +
         num(kLeft + pw - 130) + "\" y2=\"" + num(ly_legend - 4) + "\" stroke=\"" + colour +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kLeft + pw - 124) + "\" y=\"" + num(ly_legend) + "\">" + escape(sr.name) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace shadowkit::cli
