#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "shadowkit/cli/cli.hpp"
#include "shadowkit/datakit/dataset_io.hpp"
#include "shadowkit/evalkit/metrics.hpp"
#include "shadowkit/evalkit/report.hpp"
#include "shadowkit/fileio.hpp"
#include "shadowkit/models/detector.hpp"
#include "tempdir.hpp"

using namespace shadowkit;
using nlohmann::json;
using shadowkit::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sk(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) { return path.string(); }

json read_json(const std::filesystem::path& path) { return json::parse(read_file(path)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
  CHECK(sk({}).code == cli::kExitUsage);
  CHECK(sk({"frobnicate"}).code == cli::kExitUsage);
  const Result r = sk({"synth", "--count", "3"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("--out") != std::string::npos);
  CHECK(sk({"synth", "--out", "x", "--count", "minus"}).code == cli::kExitUsage);
  CHECK(sk({"--help"}).code == cli::kExitOk);
}

TEST_CASE("synth writes reproducible datasets") {
  TempDir tmp("cli_synth");
  REQUIRE(sk({"--quiet", "synth", "--out", p(tmp / "a"), "--count", "12", "--seed", "42"}).code == 0);
  REQUIRE(sk({"--quiet", "--seed", "42", "synth", "--out", p(tmp / "b"), "--count", "12"}).code == 0);
  CHECK(datakit::dataset_hash(tmp / "a") == datakit::dataset_hash(tmp / "b"));
  CHECK(datakit::load_dataset(tmp / "a").samples.size() == 12);
  const json m = read_json(tmp / "a" / "run.manifest.json");
  CHECK(m["config"]["count"] == 12);
  CHECK(m["config"]["seed"] == 42);

  REQUIRE(sk({"synth", "--out", p(tmp / "c"), "--count", "12", "--seed", "43"}).code == 0);
  CHECK(datakit::dataset_hash(tmp / "a") != datakit::dataset_hash(tmp / "c"));

  REQUIRE(sk({"synth", "--out", p(tmp / "empty"), "--count", "0"}).code == 0);
  CHECK(datakit::load_dataset(tmp / "empty").samples.empty());
}

TEST_CASE("split and augment") {
  TempDir tmp("cli_split");
  const auto ds = tmp / "ds";
  REQUIRE(sk({"--quiet", "synth", "--out", p(ds), "--count", "250"}).code == 0);
  REQUIRE(sk({"split", "--dataset", p(ds), "--ratios", "8:1:1"}).code == 0);
  const auto split = datakit::load_dataset(ds).split;
  REQUIRE(split);
  CHECK(split->train.size() == 200);
  CHECK(split->val.size() == 25);
  CHECK(split->test.size() == 25);
  CHECK(std::filesystem::exists(ds / "split.manifest.json"));

  const std::string before = datakit::dataset_hash(ds);
  const Result r = sk({"--quiet", "augment", "--dataset", p(ds), "--out", p(tmp / "aug"), "--hflip", "--warp",
                       "--noise-sigma", "0.02"});
  REQUIRE(r.code == 0);
  CHECK(datakit::dataset_hash(ds) == before);
  const auto aug = datakit::load_dataset(tmp / "aug");
  REQUIRE(aug.split);
  CHECK(aug.split->train.size() == 800);
  CHECK(aug.split->val == split->val);
  CHECK(aug.split->test == split->test);
  std::size_t derived = 0;
  for (const auto& s : aug.samples) {
    if (s.source.empty()) continue;
    ++derived;
    CHECK(std::find(split->train.begin(), split->train.end(), s.source) != split->train.end());
  }
  CHECK(derived == 600);

  const Result refused = sk({"augment", "--dataset", p(ds), "--out", p(tmp / "bad"), "--split", "test", "--hflip"});
  CHECK(refused.code == cli::kExitUsage);
  CHECK(refused.err.find("test") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(tmp / "bad"));
}

TEST_CASE("oracle eval closes the loop") {
  TempDir tmp("cli_oracle");
  const auto ds = tmp / "ds";
  REQUIRE(sk({"--quiet", "synth", "--out", p(ds), "--count", "30"}).code == 0);
  REQUIRE(sk({"--quiet", "split", "--dataset", p(ds)}).code == 0);
  const auto rep = tmp / "rep";
  REQUIRE(sk({"--quiet", "eval", "--oracle", "--dataset", p(ds), "--report", p(rep), "--split", "all"}).code == 0);
  const json m = read_json(rep / "metrics.json");
  CHECK(m["map50"].get<double>() == 1.0);
  CHECK(m["map50_95"].get<double>() == 1.0);
  CHECK(m["mean_mask_iou"].get<double>() == 1.0);
  for (const char* f : {"curves.csv", "predictions.json", "f1_curve.svg", "pr_curve.svg", "p_curve.svg",
                        "r_curve.svg", "run.manifest.json"})
    CHECK(std::filesystem::exists(rep / f));

  // Offline re-evaluation of the written predictions reproduces curves.csv.
  const auto dets = evalkit::predictions_from_json(read_file(rep / "predictions.json"));
  const auto data = datakit::load_dataset(ds);
  const auto gts = models::ground_truth(data.subset("all"));
  CHECK(evalkit::curves_to_csv(evalkit::curves(dets, gts)) == read_file(rep / "curves.csv"));
}

TEST_CASE("eval errors") {
  TempDir tmp("cli_eval_err");
  const auto ds = tmp / "ds";
  REQUIRE(sk({"--quiet", "synth", "--out", p(ds), "--count", "3"}).code == 0);
  REQUIRE(sk({"--quiet", "split", "--dataset", p(ds)}).code == 0);
  const Result empty = sk({"eval", "--oracle", "--dataset", p(ds), "--report", p(tmp / "r")});
  CHECK(empty.code == cli::kExitUsage);
  CHECK(empty.err.find("'test'") != std::string::npos);

  REQUIRE(sk({"--quiet", "synth", "--out", p(tmp / "small"), "--count", "4", "--size", "32"}).code == 0);
  REQUIRE(sk({"--quiet", "train-det", "--train", p(ds), "--out", p(tmp / "det"), "--epochs", "0"}).code == 0);
  const Result mismatch = sk({"eval", "--model", p(tmp / "det.last.model.json"), "--dataset", p(tmp / "small"),
                              "--report", p(tmp / "r2")});
  CHECK(mismatch.code == cli::kExitUsage);
  CHECK(mismatch.err.find("family mismatch") != std::string::npos);

  CHECK(sk({"eval", "--dataset", p(ds), "--report", p(tmp / "r3"), "--split", "all"}).code == cli::kExitUsage);
  CHECK(sk({"eval", "--oracle", "--dataset", p(tmp / "nope"), "--report", p(tmp / "r4")}).code == cli::kExitFailure);
}

TEST_CASE("training commands") {
  TempDir tmp("cli_train");
  const auto ds = tmp / "ds";
  REQUIRE(sk({"--quiet", "synth", "--out", p(ds), "--count", "10"}).code == 0);
  REQUIRE(sk({"--quiet", "split", "--dataset", p(ds)}).code == 0);

  REQUIRE(sk({"--quiet", "train-seg", "--train", p(ds), "--out", p(tmp / "zero"), "--epochs", "0"}).code == 0);
  CHECK(read_file(tmp / "zero.history.csv") == "epoch,train_loss,lr,val_mask_iou\n");
  CHECK(std::filesystem::exists(tmp / "zero.last.model.json"));

  for (const char* cmd : {"train-det", "train-gan"}) {
    const std::string a = p(tmp / (std::string(cmd) + "_a")), b = p(tmp / (std::string(cmd) + "_b"));
    REQUIRE(sk({"--quiet", cmd, "--train", p(ds), "--out", a, "--epochs", "1"}).code == 0);
    REQUIRE(sk({"--quiet", cmd, "--train", p(ds), "--out", b, "--epochs", "1"}).code == 0);
    CHECK(read_file(a + ".last.model.json") == read_file(b + ".last.model.json"));
    CHECK(read_file(a + ".history.csv") == read_file(b + ".history.csv"));
    const json m = read_json(a + ".manifest.json");
    CHECK(m["history"]["rows"].size() == 1);
    CHECK(m["config"]["epochs"] == 1);
  }

  const Result budget =
      sk({"train-seg", "--train", p(ds), "--out", p(tmp / "tiny"), "--epochs", "1", "--budget-mb", "1"});
  CHECK(budget.code == cli::kExitFailure);
  CHECK(budget.err.find("budget") != std::string::npos);
}

TEST_CASE("config files and manifests") {
  TempDir tmp("cli_config");
  const auto ds = tmp / "ds";
  REQUIRE(sk({"--quiet", "synth", "--out", p(ds), "--count", "10"}).code == 0);
  REQUIRE(sk({"--quiet", "split", "--dataset", p(ds)}).code == 0);

  write_file_atomic(tmp / "cfg.json", R"({"epochs": 3, "lr": 0.01, "batch": 2})");
  REQUIRE(sk({"--quiet", "--config", p(tmp / "cfg.json"), "train-det", "--train", p(ds), "--out", p(tmp / "c"),
              "--epochs", "1"})
              .code == 0);
  const json m = read_json(tmp / "c.manifest.json");
  CHECK(m["config"]["epochs"] == 1);
  CHECK(m["config"]["lr"] == 0.01);
  CHECK(m["config"]["batch"] == 2);

  write_file_atomic(tmp / "bad.json", R"({"epochz": 3})");
  const Result bad = sk({"--config", p(tmp / "bad.json"), "train-det", "--train", p(ds), "--out", p(tmp / "x")});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("epochz") != std::string::npos);

  // Replaying a run manifest reproduces the run byte for byte.
  REQUIRE(sk({"--quiet", "--config", p(tmp / "c.manifest.json"), "train-det", "--out", p(tmp / "replay")}).code == 0);
  CHECK(read_file(tmp / "replay.last.model.json") == read_file(tmp / "c.last.model.json"));
  CHECK(read_file(tmp / "replay.history.csv") == read_file(tmp / "c.history.csv"));
}

TEST_CASE("flops command") {
  TempDir tmp("cli_flops");
  write_file_atomic(tmp / "toy.json",
                    R"({"family": "layers", "input": [3, 64, 64],
                        "layers": [{"type": "conv", "out": 16, "kernel": 3, "pad": 1}]})");
  const Result toy = sk({"flops", "--model", p(tmp / "toy.json"), "--format", "json"});
  REQUIRE(toy.code == 0);
  CHECK(json::parse(toy.out)["total_flops"] == 3604480);

  const Result det = sk({"flops", "--model", "detector", "--format", "json"});
  REQUIRE(det.code == 0);
  const json j = json::parse(det.out);
  std::uint64_t sum = 0;
  for (const auto& l : j["layers"]) sum += l["flops"].get<std::uint64_t>();
  CHECK(sum == j["total_flops"].get<std::uint64_t>());

  CHECK(sk({"flops", "--model", "detector"}).out.find("total") != std::string::npos);
  CHECK(sk({"flops", "--model", p(tmp / "missing.json")}).code == cli::kExitUsage);
  write_file_atomic(tmp / "garbage.json", "{");
  CHECK(sk({"flops", "--model", p(tmp / "garbage.json")}).code == cli::kExitUsage);
}

TEST_CASE("report command") {
  TempDir tmp("cli_report");
  evalkit::MetricsReport r;
  r.family = "detector";
  r.curves.thresholds = {0.5};
  r.curves.precision = {1.0};
  r.curves.recall = {0.5};
  r.curves.f1 = {2.0 / 3.0};
  r.curves.tp = {1};
  r.curves.fp = {0};
  r.curves.fn = {1};
  write_file_atomic(tmp / "metrics.json", evalkit::metrics_to_json(r));
  REQUIRE(sk({"--quiet", "report", "--metrics", p(tmp / "metrics.json"), "--svg", p(tmp / "svg")}).code == 0);
  const std::string svg = read_file(tmp / "svg" / "pr_curve.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  write_file_atomic(tmp / "broken.json", "[");
  CHECK(sk({"report", "--metrics", p(tmp / "broken.json"), "--svg", p(tmp / "s2")}).code == cli::kExitUsage);
}

}  // TEST_SUITE
