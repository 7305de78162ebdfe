#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::evalkit {

struct ClassAp {
  int class_id = 0;
  std::string name;
  std::optional<double> ap50;     // nullopt: nothing to score for this class
  std::optional<double> ap50_95;
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MetricsReport {
  std::string family;
  std::string model;
  std::string split;
  std::size_t images = 0;
  std::vector<ClassAp> per_class;
  double map50 = 0.0;
  double map50_95 = 0.0;
  double count_threshold = 0.25;
  Counts counts;
  CurveSet curves;
  std::optional<std::uint64_t> flops;
  std::optional<double> mean_mask_iou;
  std::optional<double> attenuation_score;
};

/// Fills the detection part of a report: per-class AP at 0.5 and averaged
/// over 0.50..0.95, both mAPs, curves and the counts at 0.25 confidence.
MetricsReport evaluate_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                  std::span<const std::string> class_names);

std::string metrics_to_json(const MetricsReport& r);
/// Throws DataError on malformed input.
MetricsReport metrics_from_json(std::string_view text);

/// `threshold,precision,recall,f1` with 6 decimals.
std::string curves_to_csv(const CurveSet& c);

std::string predictions_to_json(std::span<const Detection> dets);
/// Throws DataError on malformed input.
std::vector<Detection> predictions_from_json(std::string_view text);

/// Connected regions (8-neighbour) of `probs >= thr` on a width x height
/// grid, each as its bounding box and mean probability.
std::vector<std::pair<Box, double>> mask_regions(std::span<const double> probs, std::size_t width,
                                                 std::size_t height, double thr = 0.5);

}  // namespace shadowkit::evalkit
