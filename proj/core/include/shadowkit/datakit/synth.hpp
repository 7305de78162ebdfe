#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "shadowkit/datakit/sample.hpp"

namespace shadowkit::datakit {

/// Parameters of the synthetic agro-PV scene generator.
struct SceneConfig {
  std::size_t size = 64;
  int min_panels = 0;
  int max_panels = 2;
  int min_shadows = 1;
  int max_shadows = 3;
  double min_darkening = 0.35;
  double max_darkening = 0.65;
  /// Shadow semi-axes as a fraction of the image size.
  double min_radius = 0.14;
  double max_radius = 0.24;
  /// Base field colours (RGB); one is picked per scene.
  std::vector<std::array<double, 3>> palette{
      {0.30, 0.62, 0.22}, {0.36, 0.68, 0.28}, {0.42, 0.66, 0.25}, {0.28, 0.56, 0.30}};
  std::uint64_t seed = 42;
};

/// Throws RangeError on empty ranges or darkening factors outside (0, 1).
void validate(const SceneConfig& config);

/// Renders scene `index`: a textured green field, 0-2 dark panels and 1-3
/// convex quadrilateral shadows that multiply the RGB values beneath them by a
/// per-shadow factor. Returns the exact mask (union of the polygons), one
/// tight box per polygon and the shadow-free render of the same scene.
/// Pixel values are multiples of 1/255, so a PNG round trip is lossless.
/// Pure function of (config, index).
Sample synth_scene(const SceneConfig& config, std::size_t index);

/// Scenes 0..count-1 with ids "scene_00000", ...
Dataset synth_dataset(const SceneConfig& config, std::size_t count);

}  // namespace shadowkit::datakit
