#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "commands.hpp"
#include "shadowkit/datakit/dataset_io.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/fileio.hpp"
#include "shadowkit/models/model_io.hpp"
#include "shadowkit/models/train.hpp"

namespace shadowkit::cli {

using namespace models;

namespace {

struct TrainArgs {
  std::string train;
  std::string val;
  std::string out;
  std::size_t epochs = 100;
  std::optional<double> lr;
  std::size_t batch = 4;
  std::string schedule;
  std::size_t budget_mb = 2048;
  std::size_t kernel = 5;    // detector
  double lambda = 0.1;       // gan
  double gain = 1.0;         // gan
};

std::string output_prefix(std::string out) {
  const std::string suffix = ".model.json";
  if (out.size() > suffix.size() && out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    out.resize(out.size() - suffix.size());
  }
  return out;
}

struct Data {
  datakit::Dataset train;
  std::optional<datakit::Dataset> val_store;
  std::vector<const datakit::Sample*> train_refs;
  std::vector<const datakit::Sample*> val_refs;
  json hashes;
};

Data load_data(const TrainArgs& a) {
  Data d;
  d.train = datakit::load_dataset(a.train);
  d.hashes["train"] = datakit::dataset_hash(a.train);
  d.train_refs = d.train.subset(d.train.split ? "train" : "all");
  if (!a.val.empty()) {
    d.val_store = datakit::load_dataset(a.val);
    d.hashes["val"] = datakit::dataset_hash(a.val);
    d.val_refs = d.val_store->subset(d.val_store->split ? "val" : "all");
  } else if (d.train.split) {
    d.val_refs = d.train.subset("val");
  }
  if (d.train_refs.empty()) throw UsageError("training set " + a.train + " has no samples");
  return d;
}

TrainOptions options(Context& ctx, const TrainArgs& a, TrainOptions base) {
  base.epochs = a.epochs;
  if (a.lr) base.lr = *a.lr;
  ctx.config["lr"] = base.lr;
  if (a.batch == 0) throw UsageError("--batch must be >= 1");
  base.batch = a.batch;
  base.seed = ctx.seed;
  try {
    if (!a.schedule.empty()) base.schedule = lr_schedule_from_string(a.schedule);
  } catch (const RangeError& e) {
    throw UsageError(e.what());
  }
  ctx.config["schedule"] = to_string(base.schedule);
  base.budget = a.budget_mb << 20;
  base.on_epoch = [&ctx](const TrainHistory& h) {
    const auto& row = h.rows.back();
    std::string line = "epoch " + std::to_string(static_cast<long>(row[0]));
    char buf[96];
    for (std::size_t c = 1; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, " %s=%.5f", h.columns[c].c_str(), row[c]);
      line += buf;
    }
    ctx.log(line);
  };
  return base;
}

json history_json(const TrainHistory& h, std::size_t best_epoch) {
  return {{"columns", h.columns},
          {"rows", h.rows},
          {"metric", h.metric},
          {"baseline", h.baseline ? json(*h.baseline) : json(nullptr)},
          {"best_epoch", best_epoch}};
}

json final_metrics(const TrainHistory& h, std::size_t best_epoch) {
  json m = json::object();
  if (!h.rows.empty()) {
    for (std::size_t c = 1; c < h.columns.size(); ++c) m["final_" + h.columns[c]] = h.rows.back()[c];
  }
  m["best_epoch"] = best_epoch;
  if (!h.metric.empty()) {
    const auto col = h.column(h.metric);
    m["best_" + h.metric] = best_epoch == 0 ? *h.baseline : col[best_epoch - 1];
  }
  return m;
}

template <class M>
void finish(Context& ctx, const TrainArgs& a, const Data& d, const TrainResult<M>& r) {
  const std::string prefix = output_prefix(a.out);
  save_model(Model(r.last), prefix + ".last.model.json");
  save_model(Model(r.best), prefix + ".best.model.json");
  write_file_atomic(prefix + ".history.csv", r.history.to_csv());
  write_manifest(prefix + ".manifest.json",
                 run_manifest(ctx, d.hashes, history_json(r.history, r.best_epoch),
                              final_metrics(r.history, r.best_epoch)));
  ctx.out << "wrote " << prefix << ".last.model.json and " << prefix << ".best.model.json (best epoch "
          << r.best_epoch << ")\n";
  if (!r.history.rows.empty()) {
    const auto& row = r.history.rows.back();
    for (std::size_t c = 1; c < row.size(); ++c) ctx.out << r.history.columns[c] << ' ' << row[c] << '\n';
  }
}

void add_common(CLI::App* sub, TrainArgs& a) {
  sub->add_option("--train", a.train, "Training dataset directory (its train split if it has one)")
      ->required();
  sub->add_option("--val", a.val, "Validation dataset directory (default: the val split of --train)");
  sub->add_option("--out", a.out, "Output prefix for model, history and manifest files")->required();
  sub->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--lr", a.lr, "Learning rate (family default when omitted)");
  sub->add_option("--batch", a.batch, "Batch size")->capture_default_str();
  sub->add_option("--schedule", a.schedule,
                  "Learning-rate schedule: constant or cosine (family default when omitted)");
  sub->add_option("--budget-mb", a.budget_mb, "Memory budget in MiB")->capture_default_str();
}

}  // namespace

void add_train_commands(CLI::App& app, Context& ctx) {
  auto seg = std::make_shared<TrainArgs>();
  add_common(app.add_subcommand("train-seg", "Train the encoder-decoder mask network"), *seg);
  ctx.handlers["train-seg"] = [&ctx, seg] {
    const Data d = load_data(*seg);
    EncDecSpec spec;
    spec.input_size = d.train.image_size;
    try {
      spec.validate();
    } catch (const RangeError& e) {
      throw UsageError(e.what());
    }
    const auto r = train_segmentation(d.train_refs, d.val_refs, spec,
                                      options(ctx, *seg, default_segmentation_options()));
    finish(ctx, *seg, d, r);
  };

  auto det = std::make_shared<TrainArgs>();
  auto* dsub = app.add_subcommand("train-det", "Train the grid detector");
  add_common(dsub, *det);
  dsub->add_option("--kernel", det->kernel, "Backbone kernel size (odd)")->capture_default_str();
  ctx.handlers["train-det"] = [&ctx, det] {
    const Data d = load_data(*det);
    DetectorSpec spec;
    spec.kernel = det->kernel;
    spec.input_size = d.train.image_size;
    spec.class_names = d.train.class_names;
    try {
      spec.validate();
    } catch (const RangeError& e) {
      throw UsageError(e.what());
    }
    const auto r = train_detector(d.train_refs, d.val_refs, spec,
                                  options(ctx, *det, default_detector_options()));
    finish(ctx, *det, d, r);
  };

  auto gan = std::make_shared<TrainArgs>();
  auto* gsub = app.add_subcommand("train-gan", "Train the shadow attenuation GAN");
  add_common(gsub, *gan);
  gsub->add_option("--lambda", gan->lambda, "Mask sparsity weight")->capture_default_str();
  gsub->add_option("--gain", gan->gain, "Attenuation gain in [0, 1]")->capture_default_str();
  ctx.handlers["train-gan"] = [&ctx, gan] {
    const Data d = load_data(*gan);
    GanSpec spec;
    spec.lambda = gan->lambda;
    spec.gain = gan->gain;
    spec.generator.input_size = spec.discriminator.input_size = d.train.image_size;
    try {
      spec.validate();
    } catch (const RangeError& e) {
      throw UsageError(e.what());
    }
    const auto r = train_gan(d.train_refs, d.val_refs, spec, options(ctx, *gan, default_gan_options()));
    finish(ctx, *gan, d, r);
  };
}

}  // namespace shadowkit::cli
