#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::evalkit {

std::size_t MatchResult::tp_count() const {
  return static_cast<std::size_t>(std::count(true_positive.begin(), true_positive.end(), true));
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_thr) {
  MatchResult r;
  r.order.resize(dets.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  r.true_positive.assign(dets.size(), false);

  std::unordered_map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) by_image[gts[g].image_id].push_back(g);
  std::vector<bool> used(gts.size(), false);

  for (std::size_t d : r.order) {
    const Detection& det = dets[d];
    auto it = by_image.find(det.image_id);
    if (it == by_image.end()) continue;
    double best_iou = -1.0;
    std::size_t best = gts.size();
    for (std::size_t g : it->second) {
      if (used[g] || gts[g].class_id != det.class_id) continue;
      const double v = iou(det.box, gts[g].box);
      if (v >= iou_thr && v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best < gts.size()) {
      used[best] = true;
      r.true_positive[d] = true;
    }
  }
  r.unmatched_gt = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  return r;
}

}  // namespace shadowkit::evalkit
