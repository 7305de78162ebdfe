#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/metrics.hpp"
#include "shadowkit/models/detector.hpp"
#include "shadowkit/models/train.hpp"
#include "shadowkit/rng.hpp"
#include "shadowkit/tensorcore/memory.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

namespace tc = tensorcore;

std::vector<double> TrainHistory::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("history has no column " + name);
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

std::string TrainHistory::to_csv() const {
  std::string s;
  for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + columns[c];
  s += '\n';
  char buf[64];
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) s += ',';
      auto res = std::to_chars(buf, buf + sizeof buf, r[c]);
      s.append(buf, res.ptr);
    }
    s += '\n';
  }
  return s;
}

std::string to_string(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "constant") return LrSchedule::Constant;
  if (s == "cosine") return LrSchedule::Cosine;
  throw RangeError("unknown lr schedule '" + s + "' (expected constant or cosine)");
}

double scheduled_lr(LrSchedule s, double base, std::size_t epoch, std::size_t epochs) {
  if (s == LrSchedule::Constant || epochs == 0) return base;
  const double t = static_cast<double>(epoch) / static_cast<double>(epochs);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

TrainOptions default_segmentation_options() {
  TrainOptions o;
  o.schedule = LrSchedule::Cosine;
  return o;
}

TrainOptions default_detector_options() { return TrainOptions{}; }

TrainOptions default_gan_options() {
  TrainOptions o;
  o.lr = 2e-3;
  o.optimizer = tc::OptimizerKind::Adam;
  o.beta1 = 0.5;
  o.schedule = LrSchedule::Cosine;
  o.generator_lr_scale = 0.1;
  o.discriminator_warmup = 3;
  o.instance_noise = 0.1;
  o.mask_head_bias = -3.0;
  return o;
}

std::vector<const datakit::Sample*> refs(const datakit::Dataset& ds, const std::string& split) {
  return ds.subset(split);
}

double mean_mask_iou(SegmentationModel& model, SampleRefs samples) {
  if (samples.empty()) return 0.0;
  const auto probs = predict_masks(model, samples);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i]->mask) throw DataError("sample " + samples[i]->id + " has no mask");
    total += evalkit::mask_iou(probs[i], samples[i]->mask->bits);
  }
  return total / static_cast<double>(samples.size());
}

double detector_map50(DetectorModel& model, SampleRefs samples) {
  const auto dets = detect(model, samples);
  const auto gts = ground_truth(samples);
  return evalkit::map50(dets, gts);
}

namespace detail {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, 0x5eed0000ULL + epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

tc::OptimizerConfig optimizer_config(const TrainOptions& opt) {
  tc::OptimizerConfig c;
  c.kind = opt.optimizer;
  c.lr = opt.lr;
  c.momentum = opt.momentum;
  c.beta1 = opt.beta1;
  return c;
}

}  // namespace detail

TrainResult<SegmentationModel> train_segmentation(SampleRefs train, SampleRefs val,
                                                  const EncDecSpec& spec,
                                                  const TrainOptions& opt) {
  if (opt.batch == 0) throw RangeError("train_segmentation: batch must be >= 1");
  for (SampleRefs set : {train, val})
    for (const auto* s : set)
      if (!s->mask) throw DataError("train_segmentation: sample " + s->id + " has no mask");

  TrainResult<SegmentationModel> r{SegmentationModel(spec), SegmentationModel(spec), 0, {}};
  SegmentationModel& model = r.last;
  model.net.init_he(derive_seed(opt.seed, 0));
  tc::enforce_budget("train_segmentation", training_memory(model.net, opt.batch), opt.budget);

  TrainHistory& h = r.history;
  h.columns = {"epoch", "train_loss", "lr"};
  if (!val.empty()) {
    h.metric = "val_mask_iou";
    h.columns.push_back(h.metric);
    h.baseline = mean_mask_iou(model, val);
  }
  double best = h.baseline.value_or(0.0);
  r.best = model;

  auto params = model.net.parameter_ptrs();
  tc::OptimizerState state(detail::optimizer_config(opt), params);

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const double lr = scheduled_lr(opt.schedule, opt.lr, epoch, opt.epochs);
    state.set_lr(lr);
    const auto order = detail::epoch_order(train.size(), opt.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += opt.batch) {
      std::vector<const datakit::Sample*> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + opt.batch); ++k)
        batch.push_back(train[order[k]]);
      Tape tape(opt.budget);
      Var x = tape.constant(images_to_tensor(batch));
      Var y = tape.constant(masks_to_tensor(batch));
      Var loss = tc::bce_loss(model.net.forward(tape, x), y);
      tc::backward(loss);
      loss_sum += loss.value()[0] * static_cast<double>(batch.size());
      tc::step(params, state);
      tc::zero_grad(params);
    }
    std::vector<double> row{static_cast<double>(epoch + 1),
                            train.empty() ? 0.0 : loss_sum / static_cast<double>(train.size()), lr};
    if (!val.empty()) {
      const double m = mean_mask_iou(model, val);
      row.push_back(m);
      if (m > best) {
        best = m;
        r.best = model;
        r.best_epoch = epoch + 1;
      }
    }
    h.rows.push_back(std::move(row));
    if (opt.on_epoch) opt.on_epoch(h);
  }
  if (val.empty()) {
    r.best = model;
    r.best_epoch = opt.epochs;
  }
  return r;
}

}  // namespace shadowkit::models
