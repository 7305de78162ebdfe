#pragma once

#include <cstddef>
#include <cstdint>

#include "shadowkit/datakit/sample.hpp"

namespace shadowkit::datakit {

/// Mirror left-right: image, mask and pair; box x' = W - x - w.
Sample hflip(const Sample& s);

/// Affine warp about the image centre: scale * rotation * shear.
struct WarpParams {
  double rotation_deg = 0.0;  // [-10, 10]
  double scale = 1.0;         // [0.9, 1.1]
  double shear = 0.0;         // [-0.1, 0.1]
};

inline constexpr double kMaxWarpRotationDeg = 10.0;
inline constexpr double kMinWarpScale = 0.9;
inline constexpr double kMaxWarpScale = 1.1;
inline constexpr double kMaxWarpShear = 0.1;

/// Draws parameters uniformly from the allowed ranges.
WarpParams sample_warp_params(std::uint64_t seed);

/// Image and pair are resampled bilinearly with edge replication, the mask by
/// nearest neighbour; each box becomes the clamped hull of its four warped
/// corners (boxes pushed fully outside are dropped). Throws RangeError for
/// parameters outside their ranges and RangeError on a degenerate transform.
Sample warp(const Sample& s, const WarpParams& params);

/// Adds N(0, sigma) to every image channel value and clamps to [0, 1]. The
/// paired shadow-free image receives the same noise field so the pair stays
/// aligned. Mask and boxes are untouched.
Sample add_noise(const Sample& s, double sigma, std::uint64_t seed);

/// Bilinear image resize, nearest-neighbour mask resize, boxes scaled by
/// target / width. Requires target >= 8.
Sample resize(const Sample& s, std::size_t target);

/// Bilinear sample at continuous pixel coordinates (pixel centres at +0.5)
/// with edge replication.
double sample_bilinear(const Image& im, double x, double y, std::size_t channel);

}  // namespace shadowkit::datakit
