#include <filesystem>
#include <string>

#include "commands.hpp"
#include "shadowkit/datakit/augment.hpp"
#include "shadowkit/datakit/dataset_io.hpp"
#include "shadowkit/datakit/split.hpp"
#include "shadowkit/datakit/synth.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/fileio.hpp"
#include "shadowkit/rng.hpp"

namespace shadowkit::cli {

namespace fs = std::filesystem;
using namespace datakit;

namespace {

struct SynthArgs {
  std::string out;
  std::size_t count = 250;
  std::size_t size = 64;
};

struct SplitArgs {
  std::string dataset;
  std::string ratios = "8:1:1";
};

struct AugmentArgs {
  std::string dataset;
  std::string out;
  std::string split = "train";
  bool hflip = false;
  bool warp = false;
  double noise_sigma = 0.0;
};

json split_sizes_json(const Dataset& ds) {
  if (!ds.split) return nullptr;
  return {{"train", ds.split->train.size()}, {"val", ds.split->val.size()}, {"test", ds.split->test.size()}};
}

void run_synth(Context& ctx, const SynthArgs& a) {
  SceneConfig cfg;
  cfg.seed = ctx.seed;
  cfg.size = a.size;
  try {
    validate(cfg);
  } catch (const RangeError& e) {
    throw UsageError(e.what());
  }
  ctx.log("rendering " + std::to_string(a.count) + " scenes");
  const Dataset ds = synth_dataset(cfg, a.count);
  save_dataset(ds, a.out);
  const std::string hash = dataset_hash(a.out);
  write_manifest(fs::path(a.out) / "run.manifest.json",
                 run_manifest(ctx, {{"out", hash}}, nullptr, {{"samples", ds.samples.size()}}));
  ctx.out << "wrote " << ds.samples.size() << " samples to " << a.out << " (hash " << hash << ")\n";
}

void run_split(Context& ctx, const SplitArgs& a) {
  SplitRatios ratios;
  try {
    ratios = parse_ratios(a.ratios);
  } catch (const RangeError& e) {
    throw UsageError(e.what());
  }
  Dataset ds = load_dataset(a.dataset);
  if (ds.samples.empty()) throw UsageError("dataset " + a.dataset + " is empty; nothing to split");
  ds.split = split_dataset(ds, ratios, ctx.seed);
  // Only the manifest changes; the image files stay as they are.
  write_file_atomic(fs::path(a.dataset) / kManifestName, manifest_json(ds));
  write_manifest(fs::path(a.dataset) / "split.manifest.json",
                 run_manifest(ctx, {{"dataset", dataset_hash(a.dataset)}}, nullptr,
                              {{"sizes", split_sizes_json(ds)}}));
  ctx.out << "split " << ds.samples.size() << " samples: train " << ds.split->train.size()
          << ", val " << ds.split->val.size() << ", test " << ds.split->test.size() << '\n';
}

void run_augment(Context& ctx, const AugmentArgs& a) {
  if (a.split != "train") {
    throw UsageError("refusing to augment the " + a.split +
                     " split: only training data may be augmented, or evaluation would see "
                     "derived copies of its own samples");
  }
  if (!a.hflip && !a.warp && a.noise_sigma <= 0.0) {
    throw UsageError("augment: choose at least one of --hflip, --warp, --noise-sigma");
  }
  if (a.noise_sigma < 0.0) throw UsageError("augment: --noise-sigma must be >= 0");
  const Dataset src = load_dataset(a.dataset);
  if (!src.split) throw UsageError("dataset " + a.dataset + " has no split; run split first");

  Dataset out;
  out.image_size = src.image_size;
  out.class_names = src.class_names;
  SplitAssignment split;
  std::size_t index = 0;
  for (const Sample* s : src.subset("train")) {
    out.samples.push_back(*s);
    split.train.push_back(s->id);
    auto add = [&](Sample derived, const char* suffix) {
      derived.id = s->id + "_" + suffix;
      derived.source = s->id;
      try {
        validate(derived);
      } catch (const DataError& e) {
        throw DataError("augmenting sample " + s->id + ": " + e.what());
      }
      split.train.push_back(derived.id);
      out.samples.push_back(std::move(derived));
    };
    const std::uint64_t base = derive_seed(ctx.seed, index++);
    if (a.hflip) add(hflip(*s), "hflip");
    if (a.warp) add(warp(*s, sample_warp_params(derive_seed(base, 1))), "warp");
    if (a.noise_sigma > 0.0) add(add_noise(*s, a.noise_sigma, derive_seed(base, 2)), "noise");
  }
  for (const char* name : {"val", "test"}) {
    for (const Sample* s : src.subset(name)) {
      out.samples.push_back(*s);
      (std::string(name) == "val" ? split.val : split.test).push_back(s->id);
    }
  }
  out.split = split;
  save_dataset(out, a.out);
  write_manifest(fs::path(a.out) / "run.manifest.json",
                 run_manifest(ctx, {{"dataset", dataset_hash(a.dataset)}, {"out", dataset_hash(a.out)}},
                              nullptr, {{"sizes", split_sizes_json(out)}}));
  ctx.out << "wrote " << out.samples.size() << " samples to " << a.out << ": train "
          << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size()
          << '\n';
}

}  // namespace

void add_data_commands(CLI::App& app, Context& ctx) {
  auto synth = std::make_shared<SynthArgs>();
  auto* s = app.add_subcommand("synth", "Render a seeded synthetic scene dataset");
  s->add_option("--out", synth->out, "Output dataset directory")->required();
  s->add_option("--count", synth->count, "Number of scenes")->capture_default_str();
  s->add_option("--size", synth->size, "Image size in pixels")->capture_default_str()->check(CLI::Range(8, 4096));
  ctx.handlers["synth"] = [&ctx, synth] { run_synth(ctx, *synth); };

  auto split = std::make_shared<SplitArgs>();
  auto* p = app.add_subcommand("split", "Assign train/val/test splits in place");
  p->add_option("--dataset", split->dataset, "Dataset directory")->required();
  p->add_option("--ratios", split->ratios, "Split ratios train:val:test")->capture_default_str();
  ctx.handlers["split"] = [&ctx, split] { run_split(ctx, *split); };

  auto aug = std::make_shared<AugmentArgs>();
  auto* g = app.add_subcommand("augment", "Write a dataset with augmented training copies");
  g->add_option("--dataset", aug->dataset, "Source dataset directory")->required();
  g->add_option("--out", aug->out, "Output dataset directory")->required();
  g->add_option("--split", aug->split, "Split to augment (only train is allowed)")->capture_default_str();
  g->add_flag("--hflip", aug->hflip, "Add a horizontally flipped copy");
  g->add_flag("--warp", aug->warp, "Add a randomly warped copy");
  g->add_option("--noise-sigma", aug->noise_sigma, "Add a noisy copy with this sigma (0 = off)")
      ->capture_default_str();
  ctx.handlers["augment"] = [&ctx, aug] { run_augment(ctx, *aug); };
}

}  // namespace shadowkit::cli
