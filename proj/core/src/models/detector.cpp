#include "shadowkit/models/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/metrics.hpp"

namespace shadowkit::models {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// BCE of sigmoid(z) against t, in logit form: no clamp needed.
double bce_logit(double z, double t) {
  return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

void DetectorSpec::validate() const {
  if (channels.empty()) throw RangeError("detector: channel ladder is empty");
  for (auto c : channels)
    if (c == 0) throw RangeError("detector: channel counts must be positive");
  if (kernel == 0 || kernel % 2 == 0) throw RangeError("detector: kernel must be odd");
  if (class_names.empty()) throw RangeError("detector: at least one class is required");
  const std::size_t div = std::size_t{1} << channels.size();
  if (input_size == 0 || input_size % div != 0) {
    throw RangeError("detector: input size " + std::to_string(input_size) + " not divisible by " +
                     std::to_string(div));
  }
}

Network build_detector(const DetectorSpec& spec) {
  spec.validate();
  const int pad = static_cast<int>(spec.kernel / 2);
  std::vector<LayerDef> layers;
  for (std::size_t s = 0; s < spec.channels.size(); ++s) {
    const std::string n = "conv" + std::to_string(s + 1);
    layers.push_back(conv_layer(n, spec.channels[s], spec.kernel, 2, pad));
    layers.push_back(leaky_layer(n + "_act", spec.slope));
  }
  layers.push_back(conv_layer("head", 5 + spec.num_classes(), 1, 1, 0));
  return Network({3, spec.input_size, spec.input_size}, std::move(layers));
}

DetectorTargets encode_targets(std::span<const std::vector<datakit::LabeledBox>> boxes,
                               std::size_t image_size, std::size_t grid, std::size_t classes) {
  DetectorTargets t;
  t.batch = boxes.size();
  t.grid = grid;
  t.classes = classes;
  const std::size_t cells = grid * grid;
  t.responsible.assign(t.batch * cells, 0);
  t.box.assign(t.batch * 4 * cells, 0.0);
  t.class_id.assign(t.batch * cells, -1);
  std::vector<double> owner_area(t.batch * cells, 0.0);
  const double size = static_cast<double>(image_size);
  const double cell = size / static_cast<double>(grid);

  for (std::size_t n = 0; n < boxes.size(); ++n) {
    for (const auto& lb : boxes[n]) {
      const Box& b = lb.box;
      if (!(b.w > 0.0 && b.h > 0.0) || b.x < 0.0 || b.y < 0.0 || b.right() > size ||
          b.bottom() > size) {
        throw DataError("box (" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
                        std::to_string(b.w) + ", " + std::to_string(b.h) +
                        ") lies outside the " + std::to_string(image_size) + " px image");
      }
      if (lb.class_id < 0 || static_cast<std::size_t>(lb.class_id) >= classes) {
        throw DataError("box class id " + std::to_string(lb.class_id) + " out of range");
      }
      const auto j = std::min(grid - 1, static_cast<std::size_t>(b.cx() / cell));
      const auto i = std::min(grid - 1, static_cast<std::size_t>(b.cy() / cell));
      const std::size_t c = n * cells + i * grid + j;
      if (t.responsible[c] && owner_area[c] >= b.area()) continue;
      t.responsible[c] = 1;
      owner_area[c] = b.area();
      t.class_id[c] = lb.class_id;
      const std::size_t base = n * 4 * cells + i * grid + j;
      t.box[base] = b.cx() / cell - static_cast<double>(j);
      t.box[base + cells] = b.cy() / cell - static_cast<double>(i);
      t.box[base + 2 * cells] = b.w / size;
      t.box[base + 3 * cells] = b.h / size;
    }
  }
  return t;
}

Var detection_loss(Var raw, const DetectorTargets& tg) {
  const Shape& s = raw.shape();
  const Shape want{tg.batch, 5 + tg.classes, tg.grid, tg.grid};
  if (s != want) {
    throw ShapeError("detection_loss: raw output expected " + tensorcore::shape_string(want) +
                     ", got " + tensorcore::shape_string(s));
  }
  Tape& tape = *raw.tape();
  const std::size_t cells = tg.grid * tg.grid, ch = 5 + tg.classes;
  const double inv_n = 1.0 / static_cast<double>(tg.batch * cells);
  constexpr double kNoObj = 0.5, kCoord = 5.0;

  const auto z = raw.value().data();
  double loss = 0.0;
  for (std::size_t n = 0; n < tg.batch; ++n) {
    for (std::size_t c = 0; c < cells; ++c) {
      const double* cz = z.data() + n * ch * cells + c;
      const bool obj = tg.responsible[n * cells + c] != 0;
      loss += (obj ? 1.0 : kNoObj) * bce_logit(cz[4 * cells], obj ? 1.0 : 0.0);
      if (!obj) continue;
      for (std::size_t k = 0; k < 4; ++k) {
        const double d = sigmoid(cz[k * cells]) - tg.box[n * 4 * cells + k * cells + c];
        loss += kCoord * d * d;
      }
      for (std::size_t k = 0; k < tg.classes; ++k) {
        const double target = static_cast<int>(k) == tg.class_id[n * cells + c] ? 1.0 : 0.0;
        loss += bce_logit(cz[(5 + k) * cells], target);
      }
    }
  }

  const std::size_t ri = raw.id();
  return tape.record(
      "detection_loss", Tensor::scalar(loss * inv_n), {ri},
      [ri, tg, cells, ch, inv_n](Tape& t, std::span<const double> gy) {
        const auto zv = t.value(ri).data();
        auto dz = t.accumulate(ri);
        const double g = gy[0] * inv_n;
        for (std::size_t n = 0; n < tg.batch; ++n) {
          for (std::size_t c = 0; c < cells; ++c) {
            const std::size_t off = n * ch * cells + c;
            const bool obj = tg.responsible[n * cells + c] != 0;
            dz[off + 4 * cells] +=
                g * (obj ? 1.0 : kNoObj) * (sigmoid(zv[off + 4 * cells]) - (obj ? 1.0 : 0.0));
            if (!obj) continue;
            for (std::size_t k = 0; k < 4; ++k) {
              const double sg = sigmoid(zv[off + k * cells]);
              const double d = sg - tg.box[n * 4 * cells + k * cells + c];
              dz[off + k * cells] += g * kCoord * 2.0 * d * sg * (1.0 - sg);
            }
            for (std::size_t k = 0; k < tg.classes; ++k) {
              const double target = static_cast<int>(k) == tg.class_id[n * cells + c] ? 1.0 : 0.0;
              dz[off + (5 + k) * cells] += g * (sigmoid(zv[off + (5 + k) * cells]) - target);
            }
          }
        }
      });
}

std::vector<Detection> decode_predictions(const Tensor& raw, std::size_t image_size,
                                          double conf_threshold,
                                          std::span<const std::string> image_ids) {
  if (raw.rank() != 4 || raw.dim(1) < 6 || raw.dim(2) != raw.dim(3)) {
    throw ShapeError("decode_predictions: raw expected [N x (5+C) x S x S], got " +
                     tensorcore::shape_string(raw.shape()));
  }
  if (image_ids.size() != raw.dim(0)) {
    throw ShapeError("decode_predictions: " + std::to_string(raw.dim(0)) + " outputs but " +
                     std::to_string(image_ids.size()) + " image ids");
  }
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw RangeError("decode_predictions: conf_threshold must be in [0, 1]");
  }
  const std::size_t n_img = raw.dim(0), ch = raw.dim(1), grid = raw.dim(2);
  const std::size_t cells = grid * grid, classes = ch - 5;
  const double size = static_cast<double>(image_size);
  const double cell = size / static_cast<double>(grid);
  const auto z = raw.data();

  std::vector<Detection> out;
  for (std::size_t n = 0; n < n_img; ++n) {
    for (std::size_t i = 0; i < grid; ++i) {
      for (std::size_t j = 0; j < grid; ++j) {
        const double* cz = z.data() + n * ch * cells + i * grid + j;
        std::size_t best = 0;
        for (std::size_t k = 1; k < classes; ++k)
          if (cz[(5 + k) * cells] > cz[(5 + best) * cells]) best = k;
        const double score = sigmoid(cz[4 * cells]) * sigmoid(cz[(5 + best) * cells]);
        if (score < conf_threshold) continue;
        const double cx = (static_cast<double>(j) + sigmoid(cz[0])) * cell;
        const double cy = (static_cast<double>(i) + sigmoid(cz[cells])) * cell;
        const double w = size * sigmoid(cz[2 * cells]);
        const double h = size * sigmoid(cz[3 * cells]);
        const double x0 = std::max(0.0, cx - 0.5 * w), y0 = std::max(0.0, cy - 0.5 * h);
        const double x1 = std::min(size, cx + 0.5 * w), y1 = std::min(size, cy + 0.5 * h);
        if (!(x1 > x0 && y1 > y0)) continue;
        out.push_back({image_ids[n], Box{x0, y0, x1 - x0, y1 - y0}, score, static_cast<int>(best)});
      }
    }
  }
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    const Detection& d = dets[idx];
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.class_id == d.class_id && k.image_id == d.image_id &&
          evalkit::iou(k.box, d.box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> detect(DetectorModel& model, std::span<const datakit::Sample* const> samples,
                              double conf_threshold, double nms_threshold, std::size_t batch) {
  std::vector<Detection> all;
  for (std::size_t b = 0; b < samples.size(); b += batch) {
    const auto chunk = samples.subspan(b, std::min(batch, samples.size() - b));
    Tape tape;
    Var raw = model.net.forward(tape, tape.constant(images_to_tensor(chunk)));
    std::vector<std::string> ids;
    for (const auto* s : chunk) ids.push_back(s->id);
    const auto dets = decode_predictions(raw.value(), model.spec.input_size, conf_threshold, ids);
    const auto kept = nms(dets, nms_threshold);
    all.insert(all.end(), kept.begin(), kept.end());
  }
  return all;
}

std::vector<GroundTruth> ground_truth(std::span<const datakit::Sample* const> samples) {
  std::vector<GroundTruth> gts;
  for (const auto* s : samples)
    for (const auto& b : s->boxes) gts.push_back({s->id, b.box, b.class_id});
  return gts;
}

}  // namespace shadowkit::models
