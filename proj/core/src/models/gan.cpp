#include "shadowkit/models/gan.hpp"

#include <algorithm>
#include <string>

#include "shadowkit/errors.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

void DiscriminatorSpec::validate() const {
  if (channels.empty()) throw RangeError("discriminator: channel ladder is empty");
  for (auto c : channels)
    if (c == 0) throw RangeError("discriminator: channel counts must be positive");
  if (kernel == 0 || kernel % 2 == 0) throw RangeError("discriminator: kernel must be odd");
  const std::size_t div = std::size_t{1} << channels.size();
  if (input_size == 0 || input_size % div != 0) {
    throw RangeError("discriminator: input size " + std::to_string(input_size) +
                     " not divisible by " + std::to_string(div));
  }
}

void GanSpec::validate() const {
  generator.validate();
  discriminator.validate();
  if (generator.input_size != discriminator.input_size) {
    throw RangeError("gan: generator and discriminator input sizes differ");
  }
  if (!(gain >= 0.0 && gain <= 1.0)) throw RangeError("gan: gain must be in [0, 1]");
  if (!(lambda >= 0.0)) throw RangeError("gan: lambda must be >= 0");
}

Network build_discriminator(const DiscriminatorSpec& spec) {
  spec.validate();
  const int pad = static_cast<int>(spec.kernel / 2);
  std::vector<LayerDef> layers;
  for (std::size_t s = 0; s < spec.channels.size(); ++s) {
    const std::string n = "conv" + std::to_string(s + 1);
    layers.push_back(conv_layer(n, spec.channels[s], spec.kernel, 2, pad));
    layers.push_back(leaky_layer(n + "_act", spec.slope));
  }
  layers.push_back(flatten_layer("flatten"));
  layers.push_back(linear_layer("fc", 1));
  layers.push_back(sigmoid_layer("fc_act"));
  return Network({3, spec.input_size, spec.input_size}, std::move(layers));
}

Var apply_attenuation(Var image, Var mask, double gain) {
  const Shape& xs = image.shape();
  const Shape& ms = mask.shape();
  if (xs.size() != 4 || xs[1] != 3) {
    throw ShapeError("apply_attenuation: image expected [N x 3 x H x W], got " +
                     tensorcore::shape_string(xs));
  }
  const Shape want{xs[0], 1, xs[2], xs[3]};
  if (ms != want) {
    throw ShapeError("apply_attenuation: mask expected " + tensorcore::shape_string(want) +
                     ", got " + tensorcore::shape_string(ms));
  }
  if (image.tape() != mask.tape()) throw std::invalid_argument("apply_attenuation: tapes differ");
  if (!(gain >= 0.0 && gain <= 1.0)) throw RangeError("apply_attenuation: gain must be in [0, 1]");
  Tape& tape = *image.tape();
  tape.reserve("apply_attenuation", xs);

  const std::size_t n = xs[0], plane = xs[2] * xs[3];
  const auto x = image.value().data();
  const auto m = mask.value().data();
  Tensor out(xs);
  auto y = out.data();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < plane; ++p) {
        const std::size_t i = (b * 3 + c) * plane + p;
        y[i] = x[i] + gain * m[b * plane + p] * (1.0 - x[i]);
      }

  const std::size_t xi = image.id(), mi = mask.id();
  return tape.record("apply_attenuation", std::move(out), {xi, mi},
                     [=](Tape& t, std::span<const double> gy) {
                       const auto xv = t.value(xi).data();
                       const auto mv = t.value(mi).data();
                       if (t.requires_grad(xi)) {
                         auto dx = t.accumulate(xi);
                         for (std::size_t b = 0; b < n; ++b)
                           for (std::size_t c = 0; c < 3; ++c)
                             for (std::size_t p = 0; p < plane; ++p) {
                               const std::size_t i = (b * 3 + c) * plane + p;
                               dx[i] += gy[i] * (1.0 - gain * mv[b * plane + p]);
                             }
                       }
                       if (t.requires_grad(mi)) {
                         auto dm = t.accumulate(mi);
                         for (std::size_t b = 0; b < n; ++b)
                           for (std::size_t c = 0; c < 3; ++c)
                             for (std::size_t p = 0; p < plane; ++p) {
                               const std::size_t i = (b * 3 + c) * plane + p;
                               dm[b * plane + p] += gy[i] * gain * (1.0 - xv[i]);
                             }
                       }
                     });
}

double attenuation_score(const datakit::Image& image, std::span<const double> m, double gain,
                         const datakit::Mask& shadow) {
  const std::size_t plane = image.width * image.height;
  if (m.size() != plane || shadow.bits.size() != plane) {
    throw ShapeError("attenuation_score: mask sizes differ from the image");
  }
  double in_sum = 0.0, out_sum = 0.0;
  std::size_t in_n = 0, out_n = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    const double* px = &image.pixels[p * 3];
    // The lift is linear in each channel, so it factors through the luma.
    const double lift = gain * m[p] * (1.0 - luminance(px[0], px[1], px[2]));
    if (shadow.bits[p]) {
      in_sum += lift;
      ++in_n;
    } else {
      out_sum += lift;
      ++out_n;
    }
  }
  if (in_n == 0 || out_n == 0) return 0.0;
  return in_sum / static_cast<double>(in_n) - out_sum / static_cast<double>(out_n);
}

std::vector<std::vector<double>> predict_attenuation(GanModel& model,
                                                     std::span<const datakit::Sample* const> samples,
                                                     std::size_t batch) {
  std::vector<std::vector<double>> out;
  for (std::size_t b = 0; b < samples.size(); b += batch) {
    const auto chunk = samples.subspan(b, std::min(batch, samples.size() - b));
    Tape tape;
    Var y = model.generator.forward(tape, tape.constant(images_to_tensor(chunk)));
    const auto v = y.value().data();
    const std::size_t per = v.size() / chunk.size();
    for (std::size_t i = 0; i < chunk.size(); ++i)
      out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(i * per),
                       v.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
  }
  return out;
}

double attenuation_score(GanModel& model, std::span<const datakit::Sample* const> samples) {
  std::vector<const datakit::Sample*> usable;
  for (const auto* s : samples) {
    if (!s->mask) continue;
    const std::size_t c = s->mask->count();
    if (c == 0 || c == s->mask->bits.size()) continue;
    usable.push_back(s);
  }
  if (usable.empty()) return 0.0;
  const auto masks = predict_attenuation(model, usable);
  double total = 0.0;
  for (std::size_t i = 0; i < usable.size(); ++i)
    total += attenuation_score(usable[i]->image, masks[i], model.spec.gain, *usable[i]->mask);
  return total / static_cast<double>(usable.size());
}

}  // namespace shadowkit::models
