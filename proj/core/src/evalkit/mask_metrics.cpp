#include <string>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::evalkit {

double mask_iou(std::span<const double> probs, std::span<const std::uint8_t> gt, double bin_thr) {
  if (probs.size() != gt.size()) {
    throw ShapeError("mask_iou: prediction has " + std::to_string(probs.size()) +
                     " pixels, ground truth has " + std::to_string(gt.size()));
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool p = probs[i] >= bin_thr;
    const bool g = gt[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace shadowkit::evalkit
