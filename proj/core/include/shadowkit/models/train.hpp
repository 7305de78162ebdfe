#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shadowkit/datakit/sample.hpp"
#include "shadowkit/models/specs.hpp"
#include "shadowkit/tensorcore/optim.hpp"

namespace shadowkit::models {

using SampleRefs = std::span<const datakit::Sample* const>;

/// Per-epoch training record. Column 0 is always "epoch"; each row holds one
/// completed epoch.
struct TrainHistory {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Name of the validation column used to pick the best checkpoint, empty
  /// when there is no validation data.
  std::string metric;
  /// Validation metric of the untrained model ("epoch 0").
  std::optional<double> baseline;

  std::vector<double> column(const std::string& name) const;
  /// Header line plus one line per epoch, values printed round-trip exact.
  std::string to_csv() const;
};

enum class LrSchedule { Constant, Cosine };

std::string to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(const std::string& s);

/// Learning rate for 0-based `epoch` out of `epochs`.
double scheduled_lr(LrSchedule s, double base, std::size_t epoch, std::size_t epochs);

struct TrainOptions {
  std::size_t epochs = 100;
  double lr = 0.05;
  std::size_t batch = 4;
  std::uint64_t seed = 42;
  tensorcore::OptimizerKind optimizer = tensorcore::OptimizerKind::SgdMomentum;
  double momentum = 0.9;
  double beta1 = 0.9;
  LrSchedule schedule = LrSchedule::Constant;
  std::size_t budget = Tape::kDefaultBudget;
  // GAN only.
  /// Generator lr as a multiple of `lr` (the discriminator uses `lr`).
  double generator_lr_scale = 1.0;
  /// Leading epochs in which only the discriminator is updated.
  std::size_t discriminator_warmup = 0;
  /// Std of the Gaussian noise added to every discriminator input.
  double instance_noise = 0.0;
  /// Initial bias of the generator's mask head; -3 starts near M = 0.05.
  double mask_head_bias = 0.0;
  /// Called after every epoch with the row just appended.
  std::function<void(const TrainHistory&)> on_epoch;
};

TrainOptions default_segmentation_options();
TrainOptions default_detector_options();
TrainOptions default_gan_options();

template <class M>
struct TrainResult {
  M last;
  M best;
  /// 0 when the untrained model was never beaten (or no epochs ran).
  std::size_t best_epoch = 0;
  TrainHistory history;
};

/// Per-pixel BCE on the mask head. Every sample needs a mask.
TrainResult<SegmentationModel> train_segmentation(SampleRefs train, SampleRefs val,
                                                  const EncDecSpec& spec,
                                                  const TrainOptions& opt);

/// Composite grid loss (see detection_loss); validation metric is mAP50.
TrainResult<DetectorModel> train_detector(SampleRefs train, SampleRefs val,
                                          const DetectorSpec& spec, const TrainOptions& opt);

/// Alternating discriminator / generator steps. Every training sample needs
/// its shadow-free pair; validation samples need masks for the
/// attenuation score.
TrainResult<GanModel> train_gan(SampleRefs train, SampleRefs val, const GanSpec& spec,
                                const TrainOptions& opt);

/// Pointers to every sample of a dataset split ("all", "train", ...).
std::vector<const datakit::Sample*> refs(const datakit::Dataset& ds,
                                         const std::string& split = "all");

/// Mean mask IoU of a segmentation model over samples with masks.
double mean_mask_iou(SegmentationModel& model, SampleRefs samples);

/// mAP50 of a detector (conf 0.001, NMS 0.5).
double detector_map50(DetectorModel& model, SampleRefs samples);

namespace detail {

/// Sample order for one epoch, a pure function of (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

tensorcore::OptimizerConfig optimizer_config(const TrainOptions& opt);

}  // namespace detail

}  // namespace shadowkit::models
