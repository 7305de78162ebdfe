#pragma once

#include <string>

namespace shadowkit {

/// Axis-aligned box in absolute pixels, top-left origin.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double area() const noexcept { return w * h; }
  double cx() const noexcept { return x + 0.5 * w; }
  double cy() const noexcept { return y + 0.5 * h; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// A predicted box with its confidence.
struct Detection {
  std::string image_id;
  Box box;
  double score = 0.0;
  int class_id = 0;
};

/// A ground-truth box tagged with the image it belongs to.
struct GroundTruth {
  std::string image_id;
  Box box;
  int class_id = 0;
};

}  // namespace shadowkit
