#include <filesystem>
#include <string>
#include <variant>

#include "commands.hpp"
#include "shadowkit/cli/svg.hpp"
#include "shadowkit/datakit/dataset_io.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/flops.hpp"
#include "shadowkit/evalkit/report.hpp"
#include "shadowkit/fileio.hpp"
#include "shadowkit/models/detector.hpp"
#include "shadowkit/models/gan.hpp"
#include "shadowkit/models/model_io.hpp"
#include "shadowkit/models/train.hpp"

namespace shadowkit::cli {

namespace fs = std::filesystem;
using namespace models;

namespace {

struct EvalArgs {
  std::string model;
  bool oracle = false;
  std::string dataset;
  std::string report;
  std::string split;
  double conf = 0.001;
  double nms = 0.5;
  double mask_threshold = 0.5;
};

struct FlopsArgs {
  std::string model;
  std::string format = "table";
  std::string json_out;
};

struct ReportArgs {
  std::string metrics;
  std::string svg;
  std::string manifest;
};

void write_curve_plots(const fs::path& dir, const evalkit::CurveSet& c) {
  PlotSpec unit{"", "", "", 0.0, 1.0, 0.0, 1.0};
  auto plot = [&](const char* file, const char* title, const char* xl, const char* yl,
                  const std::vector<double>& x, const std::vector<double>& y, const char* name) {
    PlotSpec p = unit;
    p.title = title;
    p.x_label = xl;
    p.y_label = yl;
    write_file_atomic(dir / file, line_plot(p, {{name, x, y}}));
  };
  plot("f1_curve.svg", "F1 vs confidence", "confidence", "F1", c.thresholds, c.f1, "F1");
  plot("pr_curve.svg", "Precision vs recall", "recall", "precision", c.recall, c.precision, "PR");
  plot("p_curve.svg", "Precision vs confidence", "confidence", "precision", c.thresholds, c.precision,
       "precision");
  plot("r_curve.svg", "Recall vs confidence", "confidence", "recall", c.thresholds, c.recall, "recall");
}

std::vector<Detection> region_detections(const std::vector<const datakit::Sample*>& samples,
                                         const std::vector<std::vector<double>>& probs, double thr) {
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& im = samples[i]->image;
    for (const auto& [box, score] : evalkit::mask_regions(probs[i], im.width, im.height, thr))
      dets.push_back({samples[i]->id, box, score, 0});
  }
  return dets;
}

double mean_iou(const std::vector<const datakit::Sample*>& samples,
                const std::vector<std::vector<double>>& probs, double thr) {
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    total += evalkit::mask_iou(probs[i], samples[i]->mask->bits, thr);
  return total / static_cast<double>(samples.size());
}

void require_masks(const std::vector<const datakit::Sample*>& samples, const std::string& family) {
  for (const auto* s : samples) {
    if (!s->mask) {
      throw UsageError("family mismatch: " + family + " models are scored against masks, but sample " +
                       s->id + " has none");
    }
  }
}

void run_eval(Context& ctx, const EvalArgs& a) {
  if (a.oracle == !a.model.empty()) throw UsageError("eval: give exactly one of --model or --oracle");
  const datakit::Dataset ds = datakit::load_dataset(a.dataset);
  const std::string split = a.split.empty() ? (ds.split ? "test" : "all") : a.split;
  if (split != "all" && split != "train" && split != "val" && split != "test") {
    throw UsageError("unknown split '" + split + "'");
  }
  if (split != "all" && !ds.split) throw UsageError("dataset " + a.dataset + " has no split " + split);
  const auto samples = ds.subset(split);
  if (samples.empty()) throw UsageError("split '" + split + "' of " + a.dataset + " is empty");

  const auto gts = ground_truth(samples);
  std::vector<Detection> dets;
  evalkit::MetricsReport report;
  std::optional<double> mask_iou, atten;
  std::optional<std::uint64_t> flops;
  std::string family = "oracle";

  if (a.oracle) {
    for (const auto& g : gts) dets.push_back({g.image_id, g.box, 1.0, g.class_id});
    bool all_masks = true;
    for (const auto* s : samples) all_masks = all_masks && s->mask.has_value();
    if (all_masks) {
      std::vector<std::vector<double>> probs;
      for (const auto* s : samples) probs.emplace_back(s->mask->bits.begin(), s->mask->bits.end());
      mask_iou = mean_iou(samples, probs, a.mask_threshold);
    }
  } else {
    Model model = load_model(a.model);
    family = family_name(model);
    flops = evalkit::flops(model_layer_table(model)).total;
    const std::size_t in = std::visit(
        [](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GanModel>) return m.spec.generator.input_size;
          else return m.spec.input_size;
        },
        model);
    if (in != ds.image_size) {
      throw UsageError("family mismatch: model expects " + std::to_string(in) + " px images, dataset has " +
                       std::to_string(ds.image_size));
    }
    if (auto* m = std::get_if<SegmentationModel>(&model)) {
      require_masks(samples, family);
      const auto probs = predict_masks(*m, samples);
      mask_iou = mean_iou(samples, probs, a.mask_threshold);
      dets = region_detections(samples, probs, a.mask_threshold);
    } else if (auto* g = std::get_if<GanModel>(&model)) {
      require_masks(samples, family);
      const auto probs = predict_attenuation(*g, samples);
      mask_iou = mean_iou(samples, probs, a.mask_threshold);
      atten = attenuation_score(*g, samples);
      dets = region_detections(samples, probs, a.mask_threshold);
    } else {
      auto& d = std::get<DetectorModel>(model);
      if (d.spec.class_names != ds.class_names) {
        throw UsageError("family mismatch: detector classes differ from the dataset's classes");
      }
      dets = detect(d, samples, a.conf, a.nms);
    }
  }

  report = evalkit::evaluate_detections(dets, gts, ds.class_names);
  report.family = family;
  report.model = a.oracle ? "oracle" : a.model;
  report.split = split;
  report.images = samples.size();
  report.flops = flops;
  report.mean_mask_iou = mask_iou;
  report.attenuation_score = atten;

  const fs::path dir = a.report;
  write_file_atomic(dir / "metrics.json", evalkit::metrics_to_json(report));
  write_file_atomic(dir / "curves.csv", evalkit::curves_to_csv(report.curves));
  write_file_atomic(dir / "predictions.json", evalkit::predictions_to_json(dets));
  write_curve_plots(dir, report.curves);
  json metrics = {{"map50", report.map50}, {"map50_95", report.map50_95}};
  if (mask_iou) metrics["mean_mask_iou"] = *mask_iou;
  if (atten) metrics["attenuation_score"] = *atten;
  write_manifest(dir / "run.manifest.json",
                 run_manifest(ctx, {{"dataset", datakit::dataset_hash(a.dataset)}}, nullptr, metrics));

  ctx.out << "model " << report.model << " (" << family << "), split " << split << ", "
          << samples.size() << " images\n";
  ctx.out << "mAP50 " << report.map50 << "\nmAP50-95 " << report.map50_95 << '\n';
  if (mask_iou) ctx.out << "mean mask IoU " << *mask_iou << '\n';
  if (atten) ctx.out << "attenuation score " << *atten << '\n';
}

Network layers_network(const json& doc) {
  const auto input = doc.at("input").get<Shape>();
  std::vector<LayerDef> layers;
  std::size_t i = 0;
  for (const auto& l : doc.at("layers")) {
    const auto type = l.at("type").get<std::string>();
    const std::string name = l.value("name", type + std::to_string(++i));
    LayerDef d;
    if (type == "conv") {
      d = conv_layer(name, l.at("out").get<std::size_t>(), l.at("kernel").get<std::size_t>(),
                     l.value("stride", 1), l.value("pad", 0));
    } else if (type == "linear") {
      d = linear_layer(name, l.at("out").get<std::size_t>());
    } else if (type == "leaky_relu") {
      d = leaky_layer(name, l.value("slope", 0.1));
    } else if (type == "sigmoid") {
      d = sigmoid_layer(name);
    } else if (type == "maxpool") {
      d = pool_layer(name);
    } else if (type == "upsample") {
      d = upsample_layer(name);
    } else if (type == "flatten") {
      d = flatten_layer(name);
    } else {
      throw UsageError("unknown layer type '" + type + "'");
    }
    d.bias = l.value("bias", true);
    layers.push_back(std::move(d));
  }
  return Network(input, std::move(layers));
}

LayerTable resolve_table(const std::string& what) {
  if (!fs::exists(what)) {
    if (what == "segmentation") return model_layer_table(Model(SegmentationModel()));
    if (what == "gan") return model_layer_table(Model(GanModel()));
    if (what == "detector") return model_layer_table(Model(DetectorModel()));
    throw UsageError("no such model file: " + what);
  }
  const std::string text = read_file(what);
  try {
    const json doc = json::parse(text);
    if (doc.is_object() && doc.value("family", "") == "layers") return layers_network(doc).table();
    return model_layer_table(model_from_json(text, what));
  } catch (const json::exception& e) {
    throw UsageError(what + ": malformed model: " + e.what());
  } catch (const DataError& e) {
    throw UsageError(e.what());
  } catch (const ShapeError& e) {
    throw UsageError(what + ": " + e.what());
  }
}

void run_flops(Context& ctx, const FlopsArgs& a) {
  if (a.format != "table" && a.format != "json") throw UsageError("--format must be table or json");
  const auto report = evalkit::flops(resolve_table(a.model));
  ctx.out << (a.format == "json" ? evalkit::flops_json(report) : evalkit::flops_table(report));
  if (!a.json_out.empty()) write_file_atomic(a.json_out, evalkit::flops_json(report));
}

void run_report(Context& ctx, const ReportArgs& a) {
  evalkit::MetricsReport m;
  try {
    m = evalkit::metrics_from_json(read_file(a.metrics));
  } catch (const DataError& e) {
    throw UsageError(a.metrics + ": " + e.what());
  }
  const fs::path dir = a.svg;
  write_curve_plots(dir, m.curves);
  std::size_t charts = 4;
  if (!a.manifest.empty()) {
    json hist;
    try {
      hist = json::parse(read_file(a.manifest)).at("history");
    } catch (const json::exception& e) {
      throw UsageError(a.manifest + ": malformed run manifest: " + e.what());
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    if (!hist.is_null()) {
      try {
        const auto cols = hist.at("columns").get<std::vector<std::string>>();
        const auto rows = hist.at("rows").get<std::vector<std::vector<double>>>();
        std::vector<Series> losses, metrics;
        for (std::size_t c = 1; c < cols.size(); ++c) {
          Series s{cols[c], {}, {}};
          for (const auto& r : rows) {
            s.x.push_back(r.at(0));
            s.y.push_back(r.at(c));
          }
          if (cols[c].find("loss") != std::string::npos) losses.push_back(std::move(s));
          else if (cols[c].rfind("val_", 0) == 0) metrics.push_back(std::move(s));
        }
        write_file_atomic(dir / "loss_curve.svg", line_plot({"Loss vs epoch", "epoch", "loss"}, losses));
        write_file_atomic(dir / "metric_curve.svg",
                          line_plot({"Validation metric vs epoch", "epoch", "metric"}, metrics));
        charts += 2;
      } catch (const json::exception& e) {
        throw UsageError(a.manifest + ": malformed history: " + e.what());
      }
    }
  }
  ctx.out << "wrote " << charts << " charts to " << a.svg << '\n';
}

}  // namespace

void add_eval_commands(CLI::App& app, Context& ctx) {
  auto ev = std::make_shared<EvalArgs>();
  auto* e = app.add_subcommand("eval", "Evaluate a model (or the oracle) on a dataset split");
  e->add_option("--model", ev->model, "Model file (.model.json)");
  e->add_flag("--oracle", ev->oracle, "Predict the ground truth directly");
  e->add_option("--dataset", ev->dataset, "Dataset directory")->required();
  e->add_option("--report", ev->report, "Output directory for metrics, curves and plots")->required();
  e->add_option("--split", ev->split, "Split to evaluate (default: test, or all without splits)");
  e->add_option("--conf", ev->conf, "Detector confidence threshold")->capture_default_str();
  e->add_option("--nms", ev->nms, "NMS IoU threshold")->capture_default_str();
  e->add_option("--mask-threshold", ev->mask_threshold, "Mask binarisation threshold")->capture_default_str();
  ctx.handlers["eval"] = [&ctx, ev] { run_eval(ctx, *ev); };

  auto fl = std::make_shared<FlopsArgs>();
  auto* f = app.add_subcommand("flops", "Per-layer FLOPs of a model");
  f->add_option("--model", fl->model,
                "Model file, layer-list JSON, or a default family (segmentation, gan, detector)")
      ->required();
  f->add_option("--format", fl->format, "Output format: table or json")->capture_default_str();
  f->add_option("--json", fl->json_out, "Also write the JSON table to this file");
  ctx.handlers["flops"] = [&ctx, fl] { run_flops(ctx, *fl); };

  auto rp = std::make_shared<ReportArgs>();
  auto* r = app.add_subcommand("report", "Render metrics and training history as SVG charts");
  r->add_option("--metrics", rp->metrics, "metrics.json written by eval")->required();
  r->add_option("--svg", rp->svg, "Output directory for the charts")->required();
  r->add_option("--manifest", rp->manifest, "Training run manifest for loss/metric charts");
  ctx.handlers["report"] = [&ctx, rp] { run_report(ctx, *rp); };
}

}  // namespace shadowkit::cli
