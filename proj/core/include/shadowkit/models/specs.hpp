#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shadowkit/datakit/sample.hpp"
#include "shadowkit/models/network.hpp"

namespace shadowkit::models {

/// Encoder-decoder mask network.
///
/// Encoder: one KxK conv + leaky ReLU per ladder entry, with a 2x maxpool
/// after every stage but the last. Decoder: for each of those pools, a 2x
/// nearest upsample then KxK conv + leaky ReLU, channels walking the ladder
/// back down. Head: 1x1 conv to one channel and a sigmoid.
struct EncDecSpec {
  std::size_t input_size = 64;
  std::vector<std::size_t> channels{16, 32, 64, 128};
  std::size_t kernel = 3;
  double slope = 0.1;

  /// Throws RangeError: empty ladder, last stage other than 128 filters,
  /// even kernel, or an input size not divisible by 2^(stages-1).
  void validate() const;
};

/// Stride-2 conv ladder, flatten, one fully connected unit, sigmoid.
struct DiscriminatorSpec {
  std::size_t input_size = 64;
  std::vector<std::size_t> channels{16, 32, 64};
  std::size_t kernel = 3;
  double slope = 0.1;

  void validate() const;
};

struct GanSpec {
  EncDecSpec generator;
  DiscriminatorSpec discriminator;
  double gain = 1.0;
  double lambda = 0.1;

  void validate() const;
};

/// Stride-2 conv ladder down to an SxS grid, then a 1x1 head with 5 + C
/// channels per cell: tx, ty, tw, th, objectness, class logits.
struct DetectorSpec {
  std::size_t input_size = 64;
  std::vector<std::size_t> channels{16, 32, 64};
  std::size_t kernel = 5;
  double slope = 0.1;
  std::vector<std::string> class_names{"shadow"};

  std::size_t num_classes() const noexcept { return class_names.size(); }
  std::size_t grid() const noexcept { return input_size >> channels.size(); }
  void validate() const;
};

Network build_encdec(const EncDecSpec& spec);
Network build_discriminator(const DiscriminatorSpec& spec);
Network build_detector(const DetectorSpec& spec);

struct SegmentationModel {
  EncDecSpec spec;
  Network net;

  SegmentationModel() : SegmentationModel(EncDecSpec{}) {}
  explicit SegmentationModel(EncDecSpec s) : spec(std::move(s)), net(build_encdec(spec)) {}
};

struct GanModel {
  GanSpec spec;
  Network generator;
  Network discriminator;

  GanModel() : GanModel(GanSpec{}) {}
  explicit GanModel(GanSpec s)
      : spec(std::move(s)),
        generator(build_encdec(spec.generator)),
        discriminator(build_discriminator(spec.discriminator)) {}
};

struct DetectorModel {
  DetectorSpec spec;
  Network net;

  DetectorModel() : DetectorModel(DetectorSpec{}) {}
  explicit DetectorModel(DetectorSpec s) : spec(std::move(s)), net(build_detector(spec)) {}
};

using Model = std::variant<SegmentationModel, GanModel, DetectorModel>;

/// "segmentation", "gan" or "detector".
std::string family_name(const Model& model);

/// He initialisation of every network in the model from one seed.
void init_model(Model& model, std::uint64_t seed);

/// Layer table of a model's inference path. For a GAN this is the generator
/// followed by the discriminator.
LayerTable model_layer_table(const Model& model);

/// Stacks sample images into [N, 3, H, W].
Tensor images_to_tensor(std::span<const datakit::Sample* const> samples);
/// Stacks images into [N, 3, H, W].
Tensor images_to_tensor(std::span<const datakit::Image* const> images);
/// Stacks sample masks into [N, 1, H, W]; throws DataError naming a sample
/// without a mask.
Tensor masks_to_tensor(std::span<const datakit::Sample* const> samples);

/// Mask probabilities per sample (H*W row-major), evaluated in batches.
std::vector<std::vector<double>> predict_masks(SegmentationModel& model,
                                               std::span<const datakit::Sample* const> samples,
                                               std::size_t batch = 8);

}  // namespace shadowkit::models
