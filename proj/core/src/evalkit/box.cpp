#include <algorithm>
#include <string>
#include <tuple>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/metrics.hpp"
#include "shadowkit/layer_table.hpp"

namespace shadowkit {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Linear: return "linear";
    case LayerKind::Activation: return "activation";
    case LayerKind::Pool: return "pool";
    case LayerKind::Upsample: return "upsample";
    case LayerKind::Flatten: return "flatten";
  }
  return "unknown";
}

}  // namespace shadowkit

namespace shadowkit::evalkit {

double iou(const Box& first, const Box& second) {
  if (!(first.w > 0.0 && first.h > 0.0 && second.w > 0.0 && second.h > 0.0)) {
    throw RangeError("iou: boxes must have positive width and height");
  }
  // Canonical operand order keeps iou(a, b) == iou(b, a) under FMA contraction.
  const auto key = [](const Box& b) { return std::tie(b.x, b.y, b.w, b.h); };
  const bool swap = key(second) < key(first);
  const Box& a = swap ? second : first;
  const Box& b = swap ? first : second;
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace shadowkit::evalkit
