#include "shadowkit/datakit/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "shadowkit/errors.hpp"

namespace shadowkit::datakit {

namespace {

Image flip_image(const Image& im) {
  Image out(im.width, im.height, im.channels);
  for (std::size_t y = 0; y < im.height; ++y)
    for (std::size_t x = 0; x < im.width; ++x)
      for (std::size_t c = 0; c < im.channels; ++c)
        out.at(im.width - 1 - x, y, c) = im.at(x, y, c);
  return out;
}

std::size_t clamp_index(double v, std::size_t n) {
  if (v < 0.0) return 0;
  const auto i = static_cast<std::size_t>(v);
  return std::min(i, n - 1);
}

// 2x2 affine matrix.
struct Affine {
  double a, b, c, d;

  double det() const { return a * d - b * c; }
  Affine inverse() const {
    const double k = 1.0 / det();
    return {d * k, -b * k, -c * k, a * k};
  }
};

}  // namespace

double sample_bilinear(const Image& im, double x, double y, std::size_t channel) {
  const double u = x - 0.5, v = y - 0.5;
  const double fu = std::floor(u), fv = std::floor(v);
  const double tu = u - fu, tv = v - fv;
  const long iu = static_cast<long>(fu), iv = static_cast<long>(fv);
  const auto cx = [&](long i) {
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(im.width) - 1));
  };
  const auto cy = [&](long i) {
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(im.height) - 1));
  };
  const double p00 = im.at(cx(iu), cy(iv), channel);
  if (tu == 0.0 && tv == 0.0) return p00;
  const double p10 = im.at(cx(iu + 1), cy(iv), channel);
  const double p01 = im.at(cx(iu), cy(iv + 1), channel);
  const double p11 = im.at(cx(iu + 1), cy(iv + 1), channel);
  return (1.0 - tv) * ((1.0 - tu) * p00 + tu * p10) + tv * ((1.0 - tu) * p01 + tu * p11);
}

Sample hflip(const Sample& s) {
  Sample out = s;
  out.image = flip_image(s.image);
  if (s.shadow_free) out.shadow_free = flip_image(*s.shadow_free);
  if (s.mask) {
    Mask m(s.mask->width, s.mask->height);
    for (std::size_t y = 0; y < m.height; ++y)
      for (std::size_t x = 0; x < m.width; ++x) m.at(m.width - 1 - x, y) = s.mask->at(x, y);
    out.mask = std::move(m);
  }
  const double W = static_cast<double>(s.image.width);
  for (auto& lb : out.boxes) lb.box.x = W - lb.box.x - lb.box.w;
  return out;
}

WarpParams sample_warp_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WarpParams p;
  p.rotation_deg = -kMaxWarpRotationDeg + 2.0 * kMaxWarpRotationDeg * unit(rng);
  p.scale = kMinWarpScale + (kMaxWarpScale - kMinWarpScale) * unit(rng);
  p.shear = -kMaxWarpShear + 2.0 * kMaxWarpShear * unit(rng);
  return p;
}

Sample warp(const Sample& s, const WarpParams& params) {
  if (!(std::abs(params.rotation_deg) <= kMaxWarpRotationDeg)) {
    throw RangeError("warp: rotation " + std::to_string(params.rotation_deg) +
                     " deg outside [-10, 10]");
  }
  if (!(params.scale >= kMinWarpScale && params.scale <= kMaxWarpScale)) {
    throw RangeError("warp: scale " + std::to_string(params.scale) + " outside [0.9, 1.1]");
  }
  if (!(std::abs(params.shear) <= kMaxWarpShear)) {
    throw RangeError("warp: shear " + std::to_string(params.shear) + " outside [-0.1, 0.1]");
  }
  const double th = params.rotation_deg * std::numbers::pi / 180.0;
  const double co = std::cos(th), si = std::sin(th), k = params.scale, sh = params.shear;
  // M = k * R(th) * [[1, sh], [0, 1]]
  const Affine fwd{k * co, k * (co * sh - si), k * si, k * (si * sh + co)};
  if (std::abs(fwd.det()) < 1e-6) throw RangeError("warp: degenerate transform");
  const Affine inv = fwd.inverse();

  const std::size_t W = s.image.width, H = s.image.height;
  const double cx = 0.5 * static_cast<double>(W), cy = 0.5 * static_cast<double>(H);
  const auto source = [&](double qx, double qy) {
    const double dx = qx - cx, dy = qy - cy;
    return std::array<double, 2>{cx + inv.a * dx + inv.b * dy, cy + inv.c * dx + inv.d * dy};
  };
  const auto warp_image = [&](const Image& im) {
    Image out(W, H, im.channels);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        const auto p = source(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5);
        for (std::size_t c = 0; c < im.channels; ++c) out.at(x, y, c) = sample_bilinear(im, p[0], p[1], c);
      }
    return out;
  };

  Sample out = s;
  out.image = warp_image(s.image);
  if (s.shadow_free) out.shadow_free = warp_image(*s.shadow_free);
  if (s.mask) {
    Mask m(W, H);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        const auto p = source(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5);
        m.at(x, y) = s.mask->at(clamp_index(p[0], W), clamp_index(p[1], H));
      }
    out.mask = std::move(m);
  }
  out.boxes.clear();
  for (const auto& lb : s.boxes) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& [px, py] : {std::pair{lb.box.x, lb.box.y}, std::pair{lb.box.right(), lb.box.y},
                                 std::pair{lb.box.x, lb.box.bottom()}, std::pair{lb.box.right(), lb.box.bottom()}}) {
      const double dx = px - cx, dy = py - cy;
      const double qx = cx + fwd.a * dx + fwd.b * dy, qy = cy + fwd.c * dx + fwd.d * dy;
      x0 = std::min(x0, qx); x1 = std::max(x1, qx);
      y0 = std::min(y0, qy); y1 = std::max(y1, qy);
    }
    x0 = std::clamp(x0, 0.0, static_cast<double>(W));
    x1 = std::clamp(x1, 0.0, static_cast<double>(W));
    y0 = std::clamp(y0, 0.0, static_cast<double>(H));
    y1 = std::clamp(y1, 0.0, static_cast<double>(H));
    if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) continue;
    out.boxes.push_back({Box{x0, y0, x1 - x0, y1 - y0}, lb.class_id});
  }
  return out;
}

Sample add_noise(const Sample& s, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw RangeError("add_noise: sigma must be >= 0");
  Sample out = s;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < out.image.pixels.size(); ++i) {
    const double e = noise(rng);
    out.image.pixels[i] = std::clamp(out.image.pixels[i] + e, 0.0, 1.0);
    if (out.shadow_free) out.shadow_free->pixels[i] = std::clamp(out.shadow_free->pixels[i] + e, 0.0, 1.0);
  }
  return out;
}

Sample resize(const Sample& s, std::size_t target) {
  if (target < 8) throw RangeError("resize: target must be >= 8, got " + std::to_string(target));
  const std::size_t W = s.image.width, H = s.image.height;
  if (target == W && target == H) return s;
  const double sx = static_cast<double>(W) / static_cast<double>(target);
  const double sy = static_cast<double>(H) / static_cast<double>(target);
  const auto resize_image = [&](const Image& im) {
    Image out(target, target, im.channels);
    for (std::size_t y = 0; y < target; ++y)
      for (std::size_t x = 0; x < target; ++x)
        for (std::size_t c = 0; c < im.channels; ++c)
          out.at(x, y, c) = sample_bilinear(im, (static_cast<double>(x) + 0.5) * sx,
                                            (static_cast<double>(y) + 0.5) * sy, c);
    return out;
  };
  Sample out = s;
  out.image = resize_image(s.image);
  if (s.shadow_free) out.shadow_free = resize_image(*s.shadow_free);
  if (s.mask) {
    Mask m(target, target);
    for (std::size_t y = 0; y < target; ++y)
      for (std::size_t x = 0; x < target; ++x)
        m.at(x, y) = s.mask->at(clamp_index((static_cast<double>(x) + 0.5) * sx, W),
                                clamp_index((static_cast<double>(y) + 0.5) * sy, H));
    out.mask = std::move(m);
  }
  const double kx = static_cast<double>(target) / static_cast<double>(W);
  const double ky = static_cast<double>(target) / static_cast<double>(H);
  for (auto& lb : out.boxes) lb.box = Box{lb.box.x * kx, lb.box.y * ky, lb.box.w * kx, lb.box.h * ky};
  return out;
}

}  // namespace shadowkit::datakit
