#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shadowkit/geometry.hpp"

namespace shadowkit::datakit {

/// Interleaved (HWC) float image with values in [0, 1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 3;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c = 3, double fill = 0.0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  double& at(std::size_t x, std::size_t y, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary per-pixel mask, 1 = shadow.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return bits[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

struct LabeledBox {
  Box box;
  int class_id = 0;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct Sample {
  std::string id;
  Image image;
  std::optional<Mask> mask;
  std::vector<LabeledBox> boxes;
  std::optional<Image> shadow_free;
  /// Id of the sample this one was derived from (augmentation provenance).
  std::string source;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Throws DataError naming the sample if a box leaves the image, a box is
/// degenerate, the mask/pair dims disagree with the image, a mask value is
/// not binary or a pixel is outside [0, 1].
void validate(const Sample& s);

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

struct Dataset {
  std::size_t image_size = 64;
  std::vector<std::string> class_names{"shadow"};
  std::vector<Sample> samples;
  std::optional<SplitAssignment> split;

  /// Samples of a named split ("train", "val", "test") or all samples for
  /// "all". Throws DataError if the dataset has no split assignment.
  std::vector<const Sample*> subset(const std::string& split_name) const;
  /// A dataset holding copies of the samples of `split_name`, no split.
  Dataset extract(const std::string& split_name) const;
};

}  // namespace shadowkit::datakit
