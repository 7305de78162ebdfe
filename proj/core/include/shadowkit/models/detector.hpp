#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shadowkit/datakit/sample.hpp"
#include "shadowkit/geometry.hpp"
#include "shadowkit/models/specs.hpp"

namespace shadowkit::models {

/// Training targets for a batch of raw detector outputs [N, 5 + C, S, S].
struct DetectorTargets {
  std::size_t batch = 0;
  std::size_t grid = 0;
  std::size_t classes = 0;
  /// 1 where a cell owns a ground-truth box, [N, S, S].
  std::vector<std::uint8_t> responsible;
  /// Sigmoid-space box targets (tx, ty, tw, th) per cell, [N, 4, S, S].
  std::vector<double> box;
  /// Class id per responsible cell, [N, S, S].
  std::vector<int> class_id;
};

/// Assigns each box to the cell containing its center; if two boxes share a
/// cell the larger one wins. Targets are (cx S/W - j, cy S/H - i, w/W, h/H).
/// Throws DataError for a box outside the image or a class id >= classes.
DetectorTargets encode_targets(std::span<const std::vector<datakit::LabeledBox>> boxes,
                               std::size_t image_size, std::size_t grid, std::size_t classes);

/// Objectness BCE (weight 0.5 on cells without an object), 5 x squared error
/// of the four sigmoid box outputs on responsible cells and class BCE on
/// responsible cells, summed and divided by the number of cells in the batch
/// (N x S x S).
Var detection_loss(Var raw, const DetectorTargets& targets);

/// One detection per cell with score sigma(to) * sigma(tc*) for the most
/// likely class c*, kept when score >= conf_threshold. Boxes are clamped to
/// the image. `image_ids` names the batch entries.
std::vector<Detection> decode_predictions(const Tensor& raw, std::size_t image_size,
                                          double conf_threshold,
                                          std::span<const std::string> image_ids);

/// Greedy suppression in descending score order: a detection is dropped if
/// a kept one of the same image and class overlaps it with IoU >= threshold.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold = 0.5);

/// Runs the detector over samples in batches and returns decoded, suppressed
/// detections for all of them.
std::vector<Detection> detect(DetectorModel& model, std::span<const datakit::Sample* const> samples,
                              double conf_threshold = 0.001, double nms_threshold = 0.5,
                              std::size_t batch = 16);

/// Ground-truth boxes of the samples as evaluation records.
std::vector<GroundTruth> ground_truth(std::span<const datakit::Sample* const> samples);

}  // namespace shadowkit::models
