#include <algorithm>
#include <limits>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/models/gan.hpp"
#include "shadowkit/models/train.hpp"
#include "shadowkit/rng.hpp"
#include "shadowkit/tensorcore/memory.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

namespace tc = tensorcore;

namespace {

struct MaskStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

MaskStats mask_stats(GanModel& model, SampleRefs samples) {
  MaskStats s{0.0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  std::size_t n = 0;
  for (const auto& m : predict_attenuation(model, samples)) {
    for (double v : m) {
      s.mean += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    n += m.size();
  }
  if (n == 0) return MaskStats{};
  s.mean /= static_cast<double>(n);
  return s;
}

Tensor ones(std::size_t n) { return Tensor({n, 1}, 1.0); }
Tensor zeros(std::size_t n) { return Tensor({n, 1}, 0.0); }

class InstanceNoise {
 public:
  InstanceNoise(double sigma, std::uint64_t seed) : sigma_(sigma), rng_(seed) {}

  Var operator()(Tape& tape, Var x) {
    if (sigma_ <= 0.0) return x;
    Tensor e(x.shape());
    for (double& v : e.storage()) v = sigma_ * dist_(rng_);
    return tc::add(x, tape.constant(std::move(e)));
  }

 private:
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
};

}  // namespace

TrainResult<GanModel> train_gan(SampleRefs train, SampleRefs val, const GanSpec& spec,
                                const TrainOptions& opt) {
  if (opt.batch == 0) throw RangeError("train_gan: batch must be >= 1");
  spec.validate();
  for (const auto* s : train)
    if (!s->shadow_free) throw DataError("train_gan: sample " + s->id + " has no shadow-free pair");
  for (const auto* s : val)
    if (!s->mask) throw DataError("train_gan: validation sample " + s->id + " has no mask");

  TrainResult<GanModel> r{GanModel(spec), GanModel(spec), 0, {}};
  GanModel& model = r.last;
  model.generator.init_he(derive_seed(opt.seed, 1));
  model.discriminator.init_he(derive_seed(opt.seed, 2));
  if (opt.mask_head_bias != 0.0) {
    Tensor* bias = model.generator.find("head.bias");
    if (bias == nullptr) throw ShapeError("train_gan: generator has no head.bias");
    for (double& v : bias->storage()) v = opt.mask_head_bias;
  }
  if (opt.generator_lr_scale <= 0.0) throw RangeError("train_gan: generator_lr_scale must be > 0");
  if (opt.instance_noise < 0.0) throw RangeError("train_gan: instance_noise must be >= 0");
  tc::enforce_budget("train_gan",
                     training_memory(model.generator, opt.batch) +
                         2 * training_memory(model.discriminator, opt.batch),
                     opt.budget);

  // Mask statistics and the attenuation score are taken on the validation
  // split, or on the training split when there is none.
  SampleRefs probe = val.empty() ? train : val;
  TrainHistory& h = r.history;
  h.columns = {"epoch", "d_loss", "g_loss", "lr", "mask_mean", "mask_min", "mask_max"};
  if (!val.empty()) {
    h.metric = "val_attenuation";
    h.columns.push_back(h.metric);
    h.baseline = attenuation_score(model, val);
  }
  double best = h.baseline.value_or(0.0);
  r.best = model;

  auto g_params = model.generator.parameter_ptrs();
  auto d_params = model.discriminator.parameter_ptrs();
  tc::OptimizerState g_state(detail::optimizer_config(opt), g_params);
  tc::OptimizerState d_state(detail::optimizer_config(opt), d_params);
  const double gain = spec.gain;
  InstanceNoise noise(opt.instance_noise, derive_seed(opt.seed, 3));

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const double lr = scheduled_lr(opt.schedule, opt.lr, epoch, opt.epochs);
    g_state.set_lr(lr * opt.generator_lr_scale);
    d_state.set_lr(lr);
    const auto order = detail::epoch_order(train.size(), opt.seed, epoch);
    double d_sum = 0.0, g_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += opt.batch) {
      std::vector<const datakit::Sample*> batch;
      std::vector<const datakit::Image*> real_images;
      for (std::size_t k = b; k < std::min(order.size(), b + opt.batch); ++k) {
        batch.push_back(train[order[k]]);
        real_images.push_back(&*train[order[k]]->shadow_free);
      }
      const std::size_t n = batch.size();

      // Generator forward; its tape stays open until the generator step.
      Tape g_tape(opt.budget);
      Var x = g_tape.constant(images_to_tensor(batch));
      Var m = model.generator.forward(g_tape, x);
      Var fake = apply_attenuation(x, m, gain);

      // Discriminator step on real pairs and the detached fakes.
      {
        Tape d_tape(opt.budget);
        Var real = d_tape.constant(images_to_tensor(std::span<const datakit::Image* const>(real_images)));
        Var fake_c = d_tape.constant(fake.value());
        Var d_real = model.discriminator.forward(d_tape, noise(d_tape, real));
        Var d_fake = model.discriminator.forward(d_tape, noise(d_tape, fake_c));
        Var d_loss = tc::add(tc::bce_loss(d_real, d_tape.constant(ones(n))),
                             tc::bce_loss(d_fake, d_tape.constant(zeros(n))));
        tc::backward(d_loss);
        d_sum += d_loss.value()[0] * static_cast<double>(n);
        tc::step(d_params, d_state);
        tc::zero_grad(d_params);
      }

      // Generator step against the updated, frozen discriminator. During
      // warm-up the loss is recorded but nothing is stepped.
      model.discriminator.set_trainable(false);
      Var d_out = model.discriminator.forward(g_tape, noise(g_tape, fake));
      Var g_loss = tc::add(tc::bce_loss(d_out, g_tape.constant(ones(n))),
                           tc::scale(tc::mean(m), spec.lambda));
      g_sum += g_loss.value()[0] * static_cast<double>(n);
      if (epoch >= opt.discriminator_warmup) {
        tc::backward(g_loss);
        tc::step(g_params, g_state);
        tc::zero_grad(g_params);
      }
      model.discriminator.set_trainable(true);
    }
    const double denom = train.empty() ? 1.0 : static_cast<double>(train.size());
    const MaskStats ms = mask_stats(model, probe);
    std::vector<double> row{static_cast<double>(epoch + 1), d_sum / denom, g_sum / denom, lr,
                            ms.mean, ms.min, ms.max};
    if (!val.empty()) {
      const double a = attenuation_score(model, val);
      row.push_back(a);
      if (a > best) {
        best = a;
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
