#include <algorithm>
#include <set>
#include <vector>

#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::evalkit {

std::optional<double> average_precision(std::span<const Detection> dets,
                                        std::span<const GroundTruth> gts, double iou_thr) {
  if (gts.empty()) {
    if (dets.empty()) return std::nullopt;
    return 0.0;
  }
  if (dets.empty()) return 0.0;

  const MatchResult m = match_detections(dets, gts, iou_thr);
  const std::size_t n_gt = gts.size();
  std::vector<std::size_t> tp_cum(dets.size());
  std::vector<double> precision(dets.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < m.order.size(); ++k) {
    if (m.true_positive[m.order[k]]) ++tp;
    tp_cum[k] = tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // Envelope: best precision at this rank or any later (higher-recall) one.
  for (std::size_t k = precision.size() - 1; k-- > 0;) {
    precision[k] = std::max(precision[k], precision[k + 1]);
  }
  // recall_k >= i / 100  <=>  100 * tp_k >= i * n_gt, evaluated exactly.
  double total = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i <= 100; ++i) {
    while (k < tp_cum.size() && 100 * tp_cum[k] < i * n_gt) ++k;
    if (k == tp_cum.size()) break;
    total += precision[k];
  }
  return total / 101.0;
}

std::map<int, std::optional<double>> per_class_ap(std::span<const Detection> dets,
                                                  std::span<const GroundTruth> gts,
                                                  double iou_thr) {
  std::set<int> classes;
  for (const auto& d : dets) classes.insert(d.class_id);
  for (const auto& g : gts) classes.insert(g.class_id);
  std::map<int, std::optional<double>> out;
  for (int c : classes) {
    std::vector<Detection> cd;
    std::vector<GroundTruth> cg;
    for (const auto& d : dets)
      if (d.class_id == c) cd.push_back(d);
    for (const auto& g : gts)
      if (g.class_id == c) cg.push_back(g);
    out[c] = average_precision(cd, cg, iou_thr);
  }
  return out;
}

double mean_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_thr) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [cls, ap] : per_class_ap(dets, gts, iou_thr)) {
    if (!ap) continue;
    total += *ap;
    ++n;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

double map50(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  return mean_ap(dets, gts, 0.5);
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50.0 + 5.0 * i) / 100.0);
  return t;
}

double map50_95(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  double total = 0.0;
  const auto thresholds = coco_iou_thresholds();
  for (double t : thresholds) total += mean_ap(dets, gts, t);
  return total / static_cast<double>(thresholds.size());
}

}  // namespace shadowkit::evalkit
