#include <cmath>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::evalkit {

CurveSet curves(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_thr,
                double step) {
  if (!(step > 0.0 && step <= 1.0)) throw RangeError("curves: step must be in (0, 1]");
  // Greedy score-ordered matching is prefix-stable: dropping the lowest-scored
  // detections never changes how the remaining ones match. One pass over the
  // sorted detections therefore serves every threshold.
  const MatchResult m = match_detections(dets, gts, iou_thr);
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));

  CurveSet c;
  std::size_t k = m.order.size();  // detections with score >= t are order[0, k)
  std::vector<std::size_t> tp_prefix(m.order.size() + 1, 0);
  for (std::size_t i = 0; i < m.order.size(); ++i)
    tp_prefix[i + 1] = tp_prefix[i] + (m.true_positive[m.order[i]] ? 1 : 0);

  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    while (k > 0 && dets[m.order[k - 1]].score < t) --k;
    const std::size_t tp = tp_prefix[k];
    const std::size_t fp = k - tp;
    const std::size_t fn = gts.size() - tp;
    const double p = k == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(k);
    const double r = gts.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(gts.size());
    const double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    c.thresholds.push_back(t);
    c.precision.push_back(p);
    c.recall.push_back(r);
    c.f1.push_back(f1);
    c.tp.push_back(tp);
    c.fp.push_back(fp);
    c.fn.push_back(fn);
  }
  return c;
}

}  // namespace shadowkit::evalkit
