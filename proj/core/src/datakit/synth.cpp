#include "shadowkit/datakit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/rng.hpp"

namespace shadowkit::datakit {

namespace {

struct Point {
  double x, y;
};

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

// Pixel-centre test against a convex polygon given in angular order.
bool inside_convex(const std::array<Point, 4>& poly, double px, double py) {
  int sign = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    const int s = cross > 0 ? 1 : (cross < 0 ? -1 : 0);
    if (s == 0) continue;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

bool overlaps(const Box& a, const Box& b, double gap) {
  return a.x < b.right() + gap && b.x < a.right() + gap && a.y < b.bottom() + gap &&
         b.y < a.bottom() + gap;
}

}  // namespace

void validate(const SceneConfig& c) {
  if (c.size < 8) throw RangeError("scene size must be >= 8");
  if (c.min_panels < 0 || c.min_panels > c.max_panels) throw RangeError("panel count range is empty");
  if (c.min_shadows < 0 || c.min_shadows > c.max_shadows) throw RangeError("shadow count range is empty");
  if (!(c.min_darkening > 0.0 && c.max_darkening < 1.0 && c.min_darkening <= c.max_darkening)) {
    throw RangeError("darkening factors must satisfy 0 < min <= max < 1");
  }
  if (!(c.min_radius > 0.0 && c.min_radius <= c.max_radius && c.max_radius < 0.5)) {
    throw RangeError("shadow radius range must satisfy 0 < min <= max < 0.5");
  }
  if (c.palette.empty()) throw RangeError("background palette is empty");
}

Sample synth_scene(const SceneConfig& config, std::size_t index) {
  validate(config);
  std::mt19937_64 rng(derive_seed(config.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  const std::size_t n = config.size;
  const double N = static_cast<double>(n);
  Image field(n, n, 3);

  // Field: vertical gradient plus per-pixel texture noise and faint crop rows.
  const auto& base = config.palette[static_cast<std::size_t>(pick(0, static_cast<int>(config.palette.size()) - 1))];
  const double row_period = uniform(5.0, 9.0);
  const double row_phase = uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t y = 0; y < n; ++y) {
    const double grad = 0.82 + 0.30 * static_cast<double>(y) / (N - 1.0);
    const double rows = 0.04 * std::sin(2.0 * std::numbers::pi * static_cast<double>(y) / row_period + row_phase);
    for (std::size_t x = 0; x < n; ++x) {
      const double tex = uniform(-0.035, 0.035);
      for (std::size_t c = 0; c < 3; ++c) {
        field.at(x, y, c) = std::clamp(base[c] * (grad + rows) + tex, 0.08, 1.0);
      }
    }
  }

  // Panels: dark blue-grey rectangles.
  const int panels = pick(config.min_panels, config.max_panels);
  for (int p = 0; p < panels; ++p) {
    const double pw = uniform(0.22, 0.40) * N, ph = uniform(0.09, 0.18) * N;
    const double px = uniform(0.0, N - pw), py = uniform(0.0, N - ph);
    const double tone = uniform(0.9, 1.1);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double cx = static_cast<double>(x) + 0.5, cy = static_cast<double>(y) + 0.5;
        if (cx < px || cx > px + pw || cy < py || cy > py + ph) continue;
        const double tex = uniform(-0.02, 0.02);
        field.at(x, y, 0) = std::clamp(0.17 * tone + tex, 0.08, 1.0);
        field.at(x, y, 1) = std::clamp(0.21 * tone + tex, 0.08, 1.0);
        field.at(x, y, 2) = std::clamp(0.34 * tone + tex, 0.08, 1.0);
      }
  }
  for (double& v : field.pixels) v = quantize(v);

  Sample s;
  char id[32];
  std::snprintf(id, sizeof id, "scene_%05zu", index);
  s.id = id;
  s.shadow_free = field;
  s.image = field;
  Mask mask(n, n);

  // Shadows: quadrilaterals inscribed in random ellipses. Vertices in angular
  // order on a convex curve give a convex polygon. Shadows are kept apart and
  // their centres fall in distinct 8x8 grid cells so every one is separable.
  const int shadows = pick(config.min_shadows, config.max_shadows);
  const double cell = N / 8.0;
  std::vector<Box> placed;
  std::vector<std::pair<int, int>> cells;
  for (int k = 0; k < shadows; ++k) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double a = uniform(config.min_radius, config.max_radius) * N;
      const double b = uniform(config.min_radius, config.max_radius) * N;
      const double phi = uniform(0.0, std::numbers::pi);
      const double theta0 = uniform(0.0, 2.0 * std::numbers::pi);
      std::array<Point, 4> poly{};
      double minx = 1e9, miny = 1e9, maxx = -1e9, maxy = -1e9;
      for (int v = 0; v < 4; ++v) {
        const double th = theta0 + v * std::numbers::pi / 2.0 + uniform(-0.35, 0.35);
        const double ex = a * std::cos(th), ey = b * std::sin(th);
        poly[v] = {ex * std::cos(phi) - ey * std::sin(phi), ex * std::sin(phi) + ey * std::cos(phi)};
        minx = std::min(minx, poly[v].x); maxx = std::max(maxx, poly[v].x);
        miny = std::min(miny, poly[v].y); maxy = std::max(maxy, poly[v].y);
      }
      if (!(1.0 - minx < N - 1.0 - maxx) || !(1.0 - miny < N - 1.0 - maxy)) continue;
      const double cx = uniform(1.0 - minx, N - 1.0 - maxx);
      const double cy = uniform(1.0 - miny, N - 1.0 - maxy);
      for (auto& pt : poly) { pt.x += cx; pt.y += cy; }

      // Rasterise by pixel centres.
      std::size_t x0 = n, y0 = n, x1 = 0, y1 = 0, count = 0;
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
          if (!inside_convex(poly, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) continue;
          x0 = std::min(x0, x); x1 = std::max(x1, x);
          y0 = std::min(y0, y); y1 = std::max(y1, y);
          ++count;
        }
      if (count == 0) continue;
      const Box tight{static_cast<double>(x0), static_cast<double>(y0),
                  static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)};
      const std::pair<int, int> c{static_cast<int>(tight.cx() / cell), static_cast<int>(tight.cy() / cell)};
      const bool clash = std::any_of(placed.begin(), placed.end(),
                                     [&](const Box& o) { return overlaps(o, tight, 2.0); }) ||
                         std::find(cells.begin(), cells.end(), c) != cells.end();
      if (clash) continue;

      const double u = uniform(config.min_darkening, config.max_darkening);
      for (std::size_t y = y0; y <= y1; ++y)
        for (std::size_t x = x0; x <= x1; ++x) {
          if (!inside_convex(poly, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) continue;
          mask.at(x, y) = 1;
          for (std::size_t ch = 0; ch < 3; ++ch) {
            // Floor on the 8-bit level keeps every shadowed value strictly darker.
            const double q = std::round(s.image.at(x, y, ch) * 255.0);
            s.image.at(x, y, ch) = std::floor(u * q) / 255.0;
          }
        }
      placed.push_back(tight);
      cells.push_back(c);
      s.boxes.push_back({tight, 0});
      break;
    }
  }
  s.mask = std::move(mask);
  return s;
}

Dataset synth_dataset(const SceneConfig& config, std::size_t count) {
  validate(config);
  Dataset ds;
  ds.image_size = config.size;
  ds.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ds.samples.push_back(synth_scene(config, i));
  return ds;
}

}  // namespace shadowkit::datakit
