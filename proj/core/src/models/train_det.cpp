#include <algorithm>

#include "shadowkit/errors.hpp"
#include "shadowkit/models/detector.hpp"
#include "shadowkit/models/train.hpp"
#include "shadowkit/rng.hpp"
#include "shadowkit/tensorcore/memory.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

namespace tc = tensorcore;

TrainResult<DetectorModel> train_detector(SampleRefs train, SampleRefs val,
                                          const DetectorSpec& spec, const TrainOptions& opt) {
  if (opt.batch == 0) throw RangeError("train_detector: batch must be >= 1");
  // Validates every label up front so a bad box fails before any training.
  for (SampleRefs set : {train, val}) {
    for (const auto* s : set) {
      try {
        encode_targets(std::span(&s->boxes, 1), spec.input_size, spec.grid(), spec.num_classes());
      } catch (const DataError& e) {
        throw DataError("train_detector: sample " + s->id + ": " + e.what());
      }
    }
  }

  TrainResult<DetectorModel> r{DetectorModel(spec), DetectorModel(spec), 0, {}};
  DetectorModel& model = r.last;
  model.net.init_he(derive_seed(opt.seed, 0));
  tc::enforce_budget("train_detector", training_memory(model.net, opt.batch), opt.budget);

  TrainHistory& h = r.history;
  h.columns = {"epoch", "train_loss", "lr"};
  if (!val.empty()) {
    h.metric = "val_map50";
    h.columns.push_back(h.metric);
    h.baseline = detector_map50(model, val);
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
      std::vector<std::vector<datakit::LabeledBox>> boxes;
      for (std::size_t k = b; k < std::min(order.size(), b + opt.batch); ++k) {
        batch.push_back(train[order[k]]);
        boxes.push_back(train[order[k]]->boxes);
      }
      const auto targets =
          encode_targets(boxes, spec.input_size, spec.grid(), spec.num_classes());
      Tape tape(opt.budget);
      Var raw = model.net.forward(tape, tape.constant(images_to_tensor(batch)));
      Var loss = detection_loss(raw, targets);
      tc::backward(loss);
      loss_sum += loss.value()[0] * static_cast<double>(batch.size());
      tc::step(params, state);
      tc::zero_grad(params);
    }
    std::vector<double> row{static_cast<double>(epoch + 1),
                            train.empty() ? 0.0 : loss_sum / static_cast<double>(train.size()), lr};
    if (!val.empty()) {
      const double m = detector_map50(model, val);
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
