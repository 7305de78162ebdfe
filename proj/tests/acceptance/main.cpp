// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; training outputs are kept under the work
// directory (SHADOWKIT_ACCEPTANCE_DIR, default ./acceptance_runs).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "shadowkit/cli/cli.hpp"
#include "shadowkit/datakit/augment.hpp"
#include "shadowkit/datakit/dataset_io.hpp"
#include "shadowkit/datakit/split.hpp"
#include "shadowkit/datakit/synth.hpp"
#include "shadowkit/evalkit/flops.hpp"
#include "shadowkit/evalkit/metrics.hpp"
#include "shadowkit/fileio.hpp"
#include "shadowkit/models/detector.hpp"
#include "shadowkit/models/specs.hpp"
#include "shadowkit/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shadowkit;
using namespace shadowkit::tensorcore;
using shadowkit::testing::check_gradients;
using shadowkit::testing::random_tensor;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path work_dir() {
  const char* env = std::getenv("SHADOWKIT_ACCEPTANCE_DIR");
  return fs::absolute(env ? fs::path(env) : fs::path("acceptance_runs"));
}

// Runs the command line in-process; failures surface the captured stderr.
int sk(const std::vector<std::string>& args, std::string* err_out = nullptr) {
  std::ostringstream out, err;
  std::vector<std::string> full{"--quiet"};
  full.insert(full.end(), args.begin(), args.end());
  const int code = cli::run(full, out, err);
  if (err_out) *err_out = err.str();
  if (code != 0) std::fprintf(stderr, "shadowkit %s: exit %d\n%s", args.front().c_str(), code, err.str().c_str());
  return code;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

std::string s(const fs::path& p) { return p.string(); }

// The 250-scene corpus shared by the training criteria.
fs::path corpus() {
  const fs::path dir = work_dir() / "corpus";
  static bool ready = false;
  if (!ready) {
    fs::remove_all(dir);
    if (sk({"--seed", "42", "synth", "--out", s(dir), "--count", "250"}) != 0 ||
        sk({"--seed", "42", "split", "--dataset", s(dir), "--ratios", "8:1:1"}) != 0)
      throw std::runtime_error("could not build the synthetic corpus");
    ready = true;
  }
  return dir;
}

std::vector<double> history_column(const json& manifest, const std::string& name) {
  const auto& cols = manifest["history"]["columns"];
  std::size_t idx = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == name) idx = i;
  if (idx == cols.size()) throw std::runtime_error("history has no column " + name);
  std::vector<double> out;
  for (const auto& row : manifest["history"]["rows"])
    out.push_back(row[idx].is_number() ? row[idx].get<double>() : std::nan(""));
  return out;
}

bool all_finite(const json& manifest) {
  for (const auto& row : manifest["history"]["rows"])
    for (const auto& v : row)
      if (!v.is_number() || !std::isfinite(v.get<double>())) return false;
  return true;
}

// 1 ----------------------------------------------------------------------

Outcome gradients() {
  using Op = std::function<Var(Tape&, const std::vector<Var>&)>;
  struct Case {
    std::string name;
    bool smooth;
    Op op;
    std::function<std::vector<Tensor>(std::mt19937_64&)> inputs;
  };
  auto spaced = [](const Shape& shape, std::mt19937_64& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.05 * static_cast<double>(i) - 0.4;
    std::shuffle(t.storage().begin(), t.storage().end(), rng);
    return t;
  };
  auto away_from_zero = [](Tensor t) {
    for (double& v : t.storage())
      if (std::abs(v) < 0.01) v = 0.25;
    return t;
  };
  const std::vector<Case> cases{
      {"conv2d", true, [](Tape&, const std::vector<Var>& v) { return conv2d(v[0], v[1], v[2], 2, 1); },
       [](std::mt19937_64& r) {
         return std::vector<Tensor>{random_tensor({2, 2, 5, 5}, r), random_tensor({3, 2, 3, 3}, r),
                                    random_tensor({3}, r)};
       }},
      {"conv_transpose2d", true,
       [](Tape&, const std::vector<Var>& v) { return conv_transpose2d(v[0], v[1], 2, 0); },
       [](std::mt19937_64& r) {
         return std::vector<Tensor>{random_tensor({1, 3, 3, 3}, r), random_tensor({3, 2, 2, 2}, r)};
       }},
      {"maxpool2d", false, [](Tape&, const std::vector<Var>& v) { return maxpool2d(v[0], 2, 2); },
       [&](std::mt19937_64& r) { return std::vector<Tensor>{spaced({1, 2, 4, 4}, r)}; }},
      {"upsample_nearest2x", true, [](Tape&, const std::vector<Var>& v) { return upsample_nearest2x(v[0]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({1, 2, 3, 3}, r)}; }},
      {"sigmoid", true, [](Tape&, const std::vector<Var>& v) { return sigmoid(v[0]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 3, 4}, r, -4, 4)}; }},
      {"leaky_relu", false, [](Tape&, const std::vector<Var>& v) { return leaky_relu(v[0], 0.1); },
       [&](std::mt19937_64& r) { return std::vector<Tensor>{away_from_zero(random_tensor({2, 3, 4}, r))}; }},
      {"linear", true, [](Tape&, const std::vector<Var>& v) { return linear(v[0], v[1], v[2]); },
       [](std::mt19937_64& r) {
         return std::vector<Tensor>{random_tensor({3, 5}, r), random_tensor({5, 4}, r), random_tensor({4}, r)};
       }},
      {"flatten", true, [](Tape&, const std::vector<Var>& v) { return flatten(v[0]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 3, 2, 2}, r)}; }},
      {"add", true, [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 5}, r), random_tensor({2, 5}, r)}; }},
      {"scale", true, [](Tape&, const std::vector<Var>& v) { return scale(v[0], -1.7); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 5}, r)}; }},
      {"sum", true, [](Tape&, const std::vector<Var>& v) { return sum(v[0]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 5}, r)}; }},
      {"mean", true, [](Tape&, const std::vector<Var>& v) { return mean(v[0]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 5}, r)}; }},
      {"bce_loss", true, [](Tape&, const std::vector<Var>& v) { return bce_loss(v[0], v[1]); },
       [](std::mt19937_64& r) {
         return std::vector<Tensor>{random_tensor({2, 5}, r, 0.05, 0.95), random_tensor({2, 5}, r, 0.0, 1.0)};
       }},
      {"mse_loss", true, [](Tape&, const std::vector<Var>& v) { return mse_loss(v[0], v[1]); },
       [](std::mt19937_64& r) { return std::vector<Tensor>{random_tensor({2, 5}, r), random_tensor({2, 5}, r)}; }},
  };
  Outcome o;
  double worst_smooth = 0.0, worst_kinked = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      std::mt19937_64 rng(derive_seed(1000 + c, static_cast<std::uint64_t>(inst)));
      worst = std::max(worst, check_gradients(cases[c].op, cases[c].inputs(rng), derive_seed(c, inst)).max_rel_error);
    }
    const double limit = cases[c].smooth ? 1e-6 : 1e-4;
    o.require(worst < limit, cases[c].name + " rel err " + fmt("%.2e", worst));
    (cases[c].smooth ? worst_smooth : worst_kinked) = std::max(cases[c].smooth ? worst_smooth : worst_kinked, worst);
  }
  o.note(std::to_string(cases.size()) + " operators x 20 instances, max rel err smooth " + fmt("%.2e", worst_smooth) +
         ", piecewise " + fmt("%.2e", worst_kinked));
  return o;
}

// 2 ----------------------------------------------------------------------

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  double worst = 0.0;
  int scored = 0;
  for (int inst = 0; inst < 200; ++inst) {
    shadowkit::testing::random_instance(rng, 20, 10, dets, gts);
    const double want = shadowkit::testing::oracle_ap(dets, gts, 0.5);
    const auto got = evalkit::average_precision(dets, gts, 0.5);
    if (want < 0) {
      o.require(!got.has_value(), "empty instance must be skipped");
      continue;
    }
    o.require(got.has_value(), "AP missing");
    if (got) worst = std::max(worst, std::abs(*got - want));
    ++scored;
  }
  o.require(worst <= 1e-9, "AP deviates from oracle by " + fmt("%.2e", worst));

  const std::vector<GroundTruth> two{{"a", {0, 0, 10, 10}, 0}, {"a", {20, 20, 10, 10}, 0}};
  const std::vector<Detection> hand{{"a", {0, 0, 10, 10}, 0.9, 0}, {"a", {40, 40, 5, 5}, 0.8, 0},
                                    {"a", {20, 20, 10, 10}, 0.7, 0}};
  const double hand_ap = *evalkit::average_precision(hand, two, 0.5);
  const double exact = (51.0 + 50.0 * 2.0 / 3.0) / 101.0;
  o.require(std::abs(hand_ap - exact) <= 1e-9, "hand example AP " + fmt("%.10f", hand_ap));
  o.require(std::abs(hand_ap - 0.8350) < 5e-5, "hand example rounds to 0.8350");

  int nms_ok = 0;
  for (int inst = 0; inst < 100; ++inst) {
    shadowkit::testing::random_instance(rng, 20, 5, dets, gts);
    for (auto& d : dets) d.class_id = static_cast<int>(rng() % 2);
    const auto got = models::nms(dets, 0.5);
    const auto want = shadowkit::testing::oracle_nms(dets, 0.5);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].box == want[i].box && got[i].score == want[i].score && got[i].image_id == want[i].image_id;
    nms_ok += same;
  }
  o.require(nms_ok == 100, "nms mismatches on " + std::to_string(100 - nms_ok) + " instances");
  o.note("AP max |diff| " + fmt("%.1e", worst) + " over " + std::to_string(scored) + " scored instances, hand AP " +
         fmt("%.6f", hand_ap) + ", nms exact " + std::to_string(nms_ok) + "/100");
  return o;
}

// 3 ----------------------------------------------------------------------

Outcome oracle_closure() {
  Outcome o;
  const fs::path root = work_dir() / "oracle";
  fs::remove_all(root);
  int checked = 0;
  for (const auto& [seed, count, size] : std::vector<std::tuple<int, int, int>>{{1, 40, 64}, {7, 25, 48}, {42, 250, 64}}) {
    const fs::path ds = root / ("ds" + std::to_string(seed));
    const fs::path rep = root / ("rep" + std::to_string(seed));
    o.require(sk({"--seed", std::to_string(seed), "synth", "--out", s(ds), "--count", std::to_string(count), "--size",
                  std::to_string(size)}) == 0,
              "synth");
    o.require(sk({"--seed", std::to_string(seed), "split", "--dataset", s(ds)}) == 0, "split");
    for (const char* split : {"all", "test"}) {
      const fs::path out = rep / split;
      if (sk({"eval", "--oracle", "--dataset", s(ds), "--split", split, "--report", s(out)}) != 0) {
        o.require(false, "eval --oracle exit code");
        continue;
      }
      const json m = read_json(out / "metrics.json");
      o.require(m["map50"].get<double>() == 1.0, "mAP50 " + m["map50"].dump());
      o.require(m["map50_95"].get<double>() == 1.0, "mAP50-95 " + m["map50_95"].dump());
      o.require(m["mean_mask_iou"].get<double>() == 1.0, "mask IoU " + m["mean_mask_iou"].dump());
      ++checked;
    }
  }
  o.note(std::to_string(checked) + " oracle evaluations: mAP50 = mAP50-95 = mask IoU = 1.0");
  return o;
}

// 4 ----------------------------------------------------------------------

Outcome segmentation() {
  Outcome o;
  const fs::path ds = corpus(), run = work_dir() / "seg";
  fs::create_directories(run);
  if (sk({"--seed", "42", "train-seg", "--train", s(ds), "--out", s(run / "seg"), "--epochs", "100"}) != 0) {
    o.require(false, "train-seg exit code");
    return o;
  }
  if (sk({"eval", "--model", s(run / "seg.last.model.json"), "--dataset", s(ds), "--split", "test", "--report",
          s(run / "test_report")}) != 0) {
    o.require(false, "eval exit code");
    return o;
  }
  const json m = read_json(run / "test_report" / "metrics.json");
  const double iou = m["mean_mask_iou"].get<double>();
  const json manifest = read_json(run / "seg.manifest.json");
  const auto loss = history_column(manifest, "train_loss");
  o.require(loss.size() == 100, "history length");
  o.require(all_finite(manifest), "finite history");
  o.require(iou >= 0.85, "test IoU " + fmt("%.4f", iou) + " < 0.85");
  if (loss.size() == 100) {
    const double rel = std::abs(loss[79] - loss[99]) / loss[99];
    o.require(rel <= 0.05, "plateau " + fmt("%.2f%%", 100 * rel));
    o.note("test IoU (last checkpoint, 25 scenes) " + fmt("%.4f", iou) + ", loss e80 " + fmt("%.5f", loss[79]) +
           " vs e100 " + fmt("%.5f", loss[99]) + " (" + fmt("%.2f%%", 100 * rel) + ")");
  }
  return o;
}

// 5 ----------------------------------------------------------------------

Outcome detection() {
  Outcome o;
  const fs::path ds = corpus(), run = work_dir() / "det";
  fs::create_directories(run);
  if (sk({"--seed", "42", "train-det", "--train", s(ds), "--out", s(run / "det"), "--epochs", "100"}) != 0) {
    o.require(false, "train-det exit code");
    return o;
  }
  if (sk({"eval", "--model", s(run / "det.last.model.json"), "--dataset", s(ds), "--split", "test", "--report",
          s(run / "test_report")}) != 0) {
    o.require(false, "eval exit code");
    return o;
  }
  const double map = read_json(run / "test_report" / "metrics.json")["map50"].get<double>();
  const json manifest = read_json(run / "det.manifest.json");
  o.require(all_finite(manifest), "finite history");
  o.require(map >= 0.80, "test mAP50 " + fmt("%.4f", map) + " < 0.80");
  o.note("test mAP50 (last checkpoint) " + fmt("%.4f", map) + ", final val mAP50 " +
         fmt("%.4f", history_column(manifest, "val_map50").back()));
  return o;
}

// 6 ----------------------------------------------------------------------

Outcome gan() {
  Outcome o;
  const fs::path ds = corpus(), run = work_dir() / "gan";
  fs::create_directories(run);
  if (sk({"--seed", "42", "train-gan", "--train", s(ds), "--out", s(run / "gan"), "--epochs", "100"}) != 0) {
    o.require(false, "train-gan exit code");
    return o;
  }
  const json manifest = read_json(run / "gan.manifest.json");
  o.require(all_finite(manifest), "non-finite loss in history");
  const auto mn = history_column(manifest, "mask_min"), mx = history_column(manifest, "mask_max");
  const double lo = *std::min_element(mn.begin(), mn.end()), hi = *std::max_element(mx.begin(), mx.end());
  o.require(lo > 0.0 && hi < 1.0, "mask left (0,1): [" + fmt("%.3g", lo) + ", " + fmt("%.17g", hi) + "]");
  const auto att = history_column(manifest, "val_attenuation");
  const double base = manifest["history"]["baseline"].get<double>();
  o.require(att.back() > base, "final attenuation " + fmt("%.5f", att.back()) + " <= epoch 0 " + fmt("%.5f", base));

  if (sk({"--seed", "42", "train-gan", "--train", s(ds), "--out", s(run / "gan_l100"), "--epochs", "100",
          "--lambda", "100"}) != 0) {
    o.require(false, "train-gan lambda 100 exit code");
    return o;
  }
  const json strong = read_json(run / "gan_l100.manifest.json");
  const double mean_m = history_column(strong, "mask_mean").back();
  o.require(mean_m < 0.05, "lambda 100 mean mask " + fmt("%.4f", mean_m));
  o.note("100 epochs finite, mask range [" + fmt("%.3g", lo) + ", " + fmt("%.6f", hi) + "], attenuation " +
         fmt("%.5f", base) + " -> " + fmt("%.5f", att.back()) + ", lambda 100 mean M " + fmt("%.2e", mean_m));
  return o;
}

// 7 ----------------------------------------------------------------------

Outcome data_pipeline() {
  Outcome o;
  datakit::SceneConfig cfg;
  cfg.seed = 42;
  const datakit::Dataset a = datakit::synth_dataset(cfg, 250), b = datakit::synth_dataset(cfg, 250);
  o.require(a.samples == b.samples, "synth not reproducible");
  const auto split = datakit::split_dataset(a, datakit::parse_ratios("8:1:1"), 42);
  o.require(split.train.size() == 200 && split.val.size() == 25 && split.test.size() == 25, "split sizes");
  o.require(split == datakit::split_dataset(b, datakit::parse_ratios("8:1:1"), 42), "split not reproducible");
  std::set<std::string> ids(split.train.begin(), split.train.end());
  ids.insert(split.val.begin(), split.val.end());
  ids.insert(split.test.begin(), split.test.end());
  o.require(ids.size() == 250, "split is not a partition");

  int involutions = 0, repro = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& smp = a.samples[i];
    involutions += datakit::hflip(datakit::hflip(smp)) == smp;
    const auto wp = datakit::sample_warp_params(derive_seed(9, i));
    repro += datakit::warp(smp, wp) == datakit::warp(smp, wp) &&
             datakit::add_noise(smp, 0.02, derive_seed(10, i)) == datakit::add_noise(smp, 0.02, derive_seed(10, i)) &&
             datakit::sample_warp_params(derive_seed(9, i)).rotation_deg == wp.rotation_deg;
  }
  o.require(involutions == 250, "hflip involution failed on " + std::to_string(250 - involutions));
  o.require(repro == 250, "seeded augmentation not reproducible on " + std::to_string(250 - repro));

  const fs::path root = work_dir() / "io";
  fs::remove_all(root);
  datakit::Dataset with_split = a;
  with_split.split = split;
  datakit::save_dataset(with_split, root / "first");
  const datakit::Dataset loaded = datakit::load_dataset(root / "first");
  o.require(loaded.samples == with_split.samples && loaded.split == with_split.split, "load differs from saved");
  datakit::save_dataset(loaded, root / "second");
  std::size_t files = 0, identical = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "first")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path twin = root / "second" / fs::relative(e.path(), root / "first");
    identical += fs::exists(twin) && read_file(e.path()) == read_file(twin);
  }
  o.require(files > 0 && identical == files, "save/load/save differs in " + std::to_string(files - identical) + " files");
  o.note("250 -> 200/25/25, 250/250 involutions, 250/250 reproducible augmentations, " + std::to_string(identical) +
         "/" + std::to_string(files) + " files byte-identical after save/load/save");
  return o;
}

// 8 ----------------------------------------------------------------------

// FLOPs straight from shapes, without the layer table's bookkeeping.
std::uint64_t analytic_flops(const models::LayerDef& d, const Shape& in, const Shape& out) {
  std::uint64_t out_elems = 1;
  for (auto v : out) out_elems *= v;
  switch (d.kind) {
    case LayerKind::Conv: {
      const std::uint64_t hw = out[1] * out[2];
      return 2ULL * d.kernel * d.kernel * in[0] * d.out * hw + (d.bias ? d.out * hw : 0);
    }
    case LayerKind::Linear:
      return 2ULL * in[0] * d.out + (d.bias ? d.out : 0);
    case LayerKind::Flatten:
      return 0;
    default:
      return out_elems;
  }
}

Outcome flops_check() {
  Outcome o;
  models::Network single({3, 64, 64}, {models::conv_layer("conv", 16, 3, 1, 1)});
  const auto single_report = evalkit::flops(single.table());
  o.require(single_report.total == 3604480, "single conv total " + std::to_string(single_report.total));
  models::Network fc({4096}, {models::linear_layer("fc", 1)});
  o.require(evalkit::flops(fc.table()).total == 8193, "single linear");

  std::size_t layers = 0;
  const models::SegmentationModel seg;
  const models::DetectorModel det;
  const models::GanModel gan;
  for (const models::Network* net : {&seg.net, &det.net, &gan.generator, &gan.discriminator}) {
    const auto report = evalkit::flops(net->table());
    std::uint64_t sum = 0;
    Shape in = net->input_shape();
    for (std::size_t i = 0; i < net->layers().size(); ++i) {
      const Shape& out = net->table()[i].output;
      const std::uint64_t want = analytic_flops(net->layers()[i], in, out);
      o.require(report.layers[i].flops == want, net->layers()[i].name + " flops " +
                                                    std::to_string(report.layers[i].flops) + " vs " +
                                                    std::to_string(want));
      sum += report.layers[i].flops;
      in = out;
      ++layers;
    }
    o.require(sum == report.total, "total is not the sum of its layers");
  }
  const auto whole = evalkit::flops(models::model_layer_table(models::Model{gan}));
  o.require(whole.total == evalkit::flops(gan.generator.table()).total + evalkit::flops(gan.discriminator.table()).total,
            "GAN total is not generator + discriminator");
  o.note("single conv 3,604,480, single linear 8,193, " + std::to_string(layers) +
         " layers of the default models match, totals additive");
  return o;
}

// 9 ----------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  const fs::path root = work_dir() / "replay";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path ds = root / "ds";

  // First pass: every command once, each leaving a manifest.
  o.require(sk({"--seed", "5", "synth", "--out", s(ds), "--count", "24"}) == 0, "synth");
  o.require(sk({"--seed", "5", "split", "--dataset", s(ds)}) == 0, "split");
  o.require(sk({"--seed", "5", "augment", "--dataset", s(ds), "--out", s(root / "aug"), "--hflip", "--warp",
                "--noise-sigma", "0.02"}) == 0,
            "augment");
  const std::vector<std::pair<std::string, std::string>> trains{
      {"train-seg", "seg"}, {"train-det", "det"}, {"train-gan", "gan"}};
  for (const auto& [cmd, name] : trains)
    o.require(sk({"--seed", "5", cmd, "--train", s(root / "aug"), "--out", s(root / name), "--epochs", "3"}) == 0, cmd);
  o.require(sk({"eval", "--model", s(root / "det.last.model.json"), "--dataset", s(ds), "--split", "all", "--report",
                s(root / "eval")}) == 0,
            "eval");
  if (!o.pass) return o;

  // Replays from the manifests into fresh locations.
  std::size_t compared = 0, same = 0;
  auto compare = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    const bool eq = fs::exists(b) && read_file(a) == read_file(b);
    same += eq;
    o.require(eq, fs::relative(b, root).string() + " differs");
  };
  o.require(sk({"--config", s(ds / "run.manifest.json"), "synth", "--out", s(root / "ds2")}) == 0, "synth replay");
  o.require(sk({"--config", s(ds / "split.manifest.json"), "split", "--dataset", s(root / "ds2")}) == 0,
            "split replay");
  compare(ds / datakit::kManifestName, root / "ds2" / datakit::kManifestName);
  o.require(datakit::dataset_hash(ds) == datakit::dataset_hash(root / "ds2"), "dataset hash differs");
  o.require(sk({"--config", s(root / "aug" / "run.manifest.json"), "augment", "--dataset", s(root / "ds2"), "--out",
                s(root / "aug2")}) == 0,
            "augment replay");
  o.require(datakit::dataset_hash(root / "aug") == datakit::dataset_hash(root / "aug2"), "augmented hash differs");
  for (const auto& [cmd, name] : trains) {
    o.require(sk({"--config", s(root / (name + ".manifest.json")), cmd, "--out", s(root / (name + "_replay"))}) == 0,
              cmd + " replay");
    for (const char* suffix : {".last.model.json", ".best.model.json", ".history.csv"})
      compare(root / (name + suffix), root / (name + "_replay" + suffix));
    const json a = read_json(root / (name + ".manifest.json")), b = read_json(root / (name + "_replay.manifest.json"));
    ++compared;
    const bool eq = a["history"] == b["history"] && a["metrics"] == b["metrics"];
    same += eq;
    o.require(eq, name + " manifest history/metrics differ");
  }
  o.require(sk({"--config", s(root / "eval" / "run.manifest.json"), "eval", "--report", s(root / "eval2")}) == 0,
            "eval replay");
  for (const char* f : {"metrics.json", "curves.csv", "predictions.json"}) compare(root / "eval" / f, root / "eval2" / f);
  o.note(std::to_string(same) + "/" + std::to_string(compared) +
         " replayed artifacts byte-identical (synth, split, augment, 3 trainings, eval)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"gradient correctness", gradients}},
      {2, {"metric-oracle equivalence", metric_oracles}},
      {3, {"oracle closure end-to-end", oracle_closure}},
      {4, {"segmentation convergence", segmentation}},
      {5, {"detection convergence", detection}},
      {6, {"GAN training sanity", gan}},
      {7, {"data-pipeline exactness", data_pipeline}},
      {8, {"FLOPs correctness", flops_check}},
      {9, {"determinism from run manifests", determinism}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  fs::create_directories(work_dir());

  int failed = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("[%s] criterion %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, entry.first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
