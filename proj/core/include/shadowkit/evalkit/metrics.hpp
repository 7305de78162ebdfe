#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <cstdint>
#include <span>
#include <vector>

#include "shadowkit/geometry.hpp"

namespace shadowkit::evalkit {

/// Intersection over union; 0 for disjoint boxes. Throws RangeError if
/// either box has a non-positive side.
double iou(const Box& a, const Box& b);

struct MatchResult {
  /// Detection indices sorted by descending score (ties keep input order).
  std::vector<std::size_t> order;
  /// TP flag per detection, indexed like the input.
  std::vector<bool> true_positive;
  std::size_t unmatched_gt = 0;

  std::size_t tp_count() const;
};

/// Greedy matching: in score order each detection claims the still-unmatched
/// ground truth of the same image and class with the highest IoU >= iou_thr
/// (lowest index on ties). Such a detection is a TP, otherwise an FP.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_thr);

/// 101-point interpolated AP over recall {0, 0.01, ..., 1} using the
/// precision envelope. Returns 0 when there are detections but no ground
/// truth and std::nullopt (skipped) when both are empty.
std::optional<double> average_precision(std::span<const Detection> dets,
                                        std::span<const GroundTruth> gts, double iou_thr);

/// AP per class id present in either input.
std::map<int, std::optional<double>> per_class_ap(std::span<const Detection> dets,
                                                  std::span<const GroundTruth> gts,
                                                  double iou_thr);

/// Mean AP over classes at the given IoU threshold. Skipped classes are left
/// out; returns 0 if no class can be scored.
double mean_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_thr);

double map50(std::span<const Detection> dets, std::span<const GroundTruth> gts);

/// Mean of mean_ap over IoU thresholds 0.50, 0.55, ..., 0.95.
double map50_95(std::span<const Detection> dets, std::span<const GroundTruth> gts);

/// The ten IoU thresholds of map50_95.
std::vector<double> coco_iou_thresholds();

/// Precision/recall/F1 as a function of the confidence threshold.
struct CurveSet {
  std::vector<double> thresholds;  // ascending
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> tp;
  std::vector<std::size_t> fp;
  std::vector<std::size_t> fn;

  std::size_t size() const noexcept { return thresholds.size(); }
};

/// Sweeps thresholds 0, step, ..., 1. At each threshold the detections with
/// score >= t are matched at `iou_thr`. P is 1 when nothing passes, R is 0
/// without ground truth, F1 = 2PR/(P+R) or 0.
CurveSet curves(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                double iou_thr = 0.5, double step = 0.01);

/// IoU of `probs >= bin_thr` against a binary mask; 1 when both are empty.
/// Throws ShapeError when sizes differ.
double mask_iou(std::span<const double> probs, std::span<const std::uint8_t> gt,
                double bin_thr = 0.5);

}  // namespace shadowkit::evalkit
