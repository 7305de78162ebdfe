#include <algorithm>
#include <string>
#include <type_traits>
#include <variant>

#include "shadowkit/errors.hpp"
#include "shadowkit/models/specs.hpp"
#include "shadowkit/rng.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

namespace {

void check_kernel(const char* what, std::size_t kernel) {
  if (kernel == 0 || kernel % 2 == 0) {
    throw RangeError(std::string(what) + ": kernel must be odd, got " + std::to_string(kernel));
  }
}

}  // namespace

void EncDecSpec::validate() const {
  if (channels.empty()) throw RangeError("encdec: channel ladder is empty");
  if (channels.back() != 128) {
    throw RangeError("encdec: last encoder stage must have 128 filters, got " +
                     std::to_string(channels.back()));
  }
  for (auto c : channels)
    if (c == 0) throw RangeError("encdec: channel counts must be positive");
  check_kernel("encdec", kernel);
  const std::size_t div = std::size_t{1} << (channels.size() - 1);
  if (input_size == 0 || input_size % div != 0) {
    throw RangeError("encdec: input size " + std::to_string(input_size) + " not divisible by " +
                     std::to_string(div));
  }
}

Network build_encdec(const EncDecSpec& spec) {
  spec.validate();
  const int pad = static_cast<int>(spec.kernel / 2);
  std::vector<LayerDef> layers;
  const std::size_t stages = spec.channels.size();
  for (std::size_t s = 0; s < stages; ++s) {
    const std::string n = "enc" + std::to_string(s + 1);
    layers.push_back(conv_layer(n, spec.channels[s], spec.kernel, 1, pad));
    layers.push_back(leaky_layer(n + "_act", spec.slope));
    if (s + 1 < stages) layers.push_back(pool_layer("pool" + std::to_string(s + 1)));
  }
  for (std::size_t s = stages - 1; s-- > 0;) {
    const std::string n = "dec" + std::to_string(stages - 1 - s);
    layers.push_back(upsample_layer("up" + std::to_string(stages - 1 - s)));
    layers.push_back(conv_layer(n, spec.channels[s], spec.kernel, 1, pad));
    layers.push_back(leaky_layer(n + "_act", spec.slope));
  }
  layers.push_back(conv_layer("head", 1, 1, 1, 0));
  layers.push_back(sigmoid_layer("head_act"));
  return Network({3, spec.input_size, spec.input_size}, std::move(layers));
}

std::string family_name(const Model& model) {
  switch (model.index()) {
    case 0: return "segmentation";
    case 1: return "gan";
    default: return "detector";
  }
}

void init_model(Model& model, std::uint64_t seed) {
  std::visit(
      [seed](auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GanModel>) {
          m.generator.init_he(derive_seed(seed, 1));
          m.discriminator.init_he(derive_seed(seed, 2));
        } else {
          m.net.init_he(derive_seed(seed, 0));
        }
      },
      model);
}

LayerTable model_layer_table(const Model& model) {
  return std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GanModel>) {
          LayerTable t;
          for (auto info : m.generator.table()) {
            info.name = "generator." + info.name;
            t.push_back(std::move(info));
          }
          for (auto info : m.discriminator.table()) {
            info.name = "discriminator." + info.name;
            t.push_back(std::move(info));
          }
          return t;
        } else {
          return m.net.table();
        }
      },
      model);
}

Tensor images_to_tensor(std::span<const datakit::Image* const> images) {
  if (images.empty()) throw ShapeError("images_to_tensor: expected at least one image, got 0");
  const std::size_t h = images[0]->height, w = images[0]->width;
  Tensor out({images.size(), 3, h, w});
  double* dst = out.data().data();
  for (const datakit::Image* im : images) {
    if (im->height != h || im->width != w || im->channels != 3) {
      throw ShapeError("images_to_tensor: expected " + std::to_string(h) + "x" + std::to_string(w) +
                       "x3, got " + std::to_string(im->height) + "x" + std::to_string(im->width) +
                       "x" + std::to_string(im->channels));
    }
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) *dst++ = im->at(x, y, c);
  }
  return out;
}

Tensor images_to_tensor(std::span<const datakit::Sample* const> samples) {
  std::vector<const datakit::Image*> images;
  for (const auto* s : samples) images.push_back(&s->image);
  return images_to_tensor(std::span<const datakit::Image* const>(images));
}

Tensor masks_to_tensor(std::span<const datakit::Sample* const> samples) {
  if (samples.empty()) throw ShapeError("masks_to_tensor: expected at least one sample, got 0");
  const std::size_t h = samples[0]->image.height, w = samples[0]->image.width;
  Tensor out({samples.size(), 1, h, w});
  double* dst = out.data().data();
  for (const auto* s : samples) {
    if (!s->mask) throw DataError("sample " + s->id + " has no mask");
    if (s->mask->width != w || s->mask->height != h) {
      throw ShapeError("masks_to_tensor: sample " + s->id + " mask size differs from the batch");
    }
    for (auto b : s->mask->bits) *dst++ = b ? 1.0 : 0.0;
  }
  return out;
}

std::vector<std::vector<double>> predict_masks(SegmentationModel& model,
                                               std::span<const datakit::Sample* const> samples,
                                               std::size_t batch) {
  std::vector<std::vector<double>> out;
  for (std::size_t b = 0; b < samples.size(); b += batch) {
    const auto chunk = samples.subspan(b, std::min(batch, samples.size() - b));
    Tape tape;
    Var y = model.net.forward(tape, tape.constant(images_to_tensor(chunk)));
    const auto v = y.value().data();
    const std::size_t per = v.size() / chunk.size();
    for (std::size_t i = 0; i < chunk.size(); ++i)
      out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(i * per),
                       v.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
  }
  return out;
}

}  // namespace shadowkit::models
