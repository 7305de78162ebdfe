#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "shadowkit/errors.hpp"
#include "shadowkit/evalkit/report.hpp"

namespace shadowkit::evalkit {

using json = nlohmann::ordered_json;

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

MetricsReport evaluate_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                  std::span<const std::string> class_names) {
  MetricsReport r;
  const auto ap50 = per_class_ap(dets, gts, 0.5);
  std::map<int, std::vector<double>> sweep;
  for (double t : coco_iou_thresholds()) {
    for (const auto& [cls, ap] : per_class_ap(dets, gts, t)) {
      if (ap) sweep[cls].push_back(*ap);
    }
  }
  for (const auto& [cls, ap] : ap50) {
    ClassAp c;
    c.class_id = cls;
    c.name = cls >= 0 && static_cast<std::size_t>(cls) < class_names.size()
                 ? class_names[static_cast<std::size_t>(cls)]
                 : "class" + std::to_string(cls);
    c.ap50 = ap;
    if (ap) {
      double s = 0.0;
      for (double v : sweep[cls]) s += v;
      c.ap50_95 = s / static_cast<double>(coco_iou_thresholds().size());
    }
    r.per_class.push_back(std::move(c));
  }
  r.map50 = map50(dets, gts);
  r.map50_95 = map50_95(dets, gts);
  r.curves = curves(dets, gts, 0.5, 0.01);

  std::vector<Detection> passing;
  for (const auto& d : dets)
    if (d.score >= r.count_threshold) passing.push_back(d);
  const MatchResult m = match_detections(passing, gts, 0.5);
  r.counts.tp = m.tp_count();
  r.counts.fp = passing.size() - r.counts.tp;
  r.counts.fn = gts.size() - r.counts.tp;
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  json per_class = json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"class_id", c.class_id},
                         {"name", c.name},
                         {"ap50", opt_json(c.ap50)},
                         {"ap50_95", opt_json(c.ap50_95)}});
  }
  json doc;
  doc["family"] = r.family;
  doc["model"] = r.model;
  doc["split"] = r.split;
  doc["images"] = r.images;
  doc["map50"] = r.map50;
  doc["map50_95"] = r.map50_95;
  doc["per_class"] = per_class;
  doc["counts"] = {{"threshold", r.count_threshold},
                   {"tp", r.counts.tp},
                   {"fp", r.counts.fp},
                   {"fn", r.counts.fn}};
  doc["mean_mask_iou"] = opt_json(r.mean_mask_iou);
  doc["attenuation_score"] = opt_json(r.attenuation_score);
  doc["flops"] = r.flops ? json(*r.flops) : json(nullptr);
  doc["curves"] = {{"threshold", r.curves.thresholds},
                   {"precision", r.curves.precision},
                   {"recall", r.curves.recall},
                   {"f1", r.curves.f1},
                   {"tp", r.curves.tp},
                   {"fp", r.curves.fp},
                   {"fn", r.curves.fn}};
  return doc.dump(2) + "\n";
}

MetricsReport metrics_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    MetricsReport r;
    r.family = doc.value("family", "");
    r.model = doc.value("model", "");
    r.split = doc.value("split", "");
    r.images = doc.value("images", std::size_t{0});
    r.map50 = doc.at("map50").get<double>();
    r.map50_95 = doc.at("map50_95").get<double>();
    for (const auto& c : doc.value("per_class", json::array())) {
      r.per_class.push_back({c.at("class_id").get<int>(), c.value("name", ""),
                             opt_double(c.at("ap50")), opt_double(c.at("ap50_95"))});
    }
    if (doc.contains("counts")) {
      const auto& k = doc["counts"];
      r.count_threshold = k.at("threshold").get<double>();
      r.counts = {k.at("tp").get<std::size_t>(), k.at("fp").get<std::size_t>(),
                  k.at("fn").get<std::size_t>()};
    }
    if (doc.contains("mean_mask_iou")) r.mean_mask_iou = opt_double(doc["mean_mask_iou"]);
    if (doc.contains("attenuation_score")) r.attenuation_score = opt_double(doc["attenuation_score"]);
    if (doc.contains("flops") && !doc["flops"].is_null()) r.flops = doc["flops"].get<std::uint64_t>();
    const json& c = doc.at("curves");
    r.curves.thresholds = c.at("threshold").get<std::vector<double>>();
    r.curves.precision = c.at("precision").get<std::vector<double>>();
    r.curves.recall = c.at("recall").get<std::vector<double>>();
    r.curves.f1 = c.at("f1").get<std::vector<double>>();
    const std::size_t n = r.curves.thresholds.size();
    if (r.curves.precision.size() != n || r.curves.recall.size() != n || r.curves.f1.size() != n) {
      throw DataError("metrics: curve arrays have different lengths");
    }
    r.curves.tp = c.value("tp", std::vector<std::size_t>(n, 0));
    r.curves.fp = c.value("fp", std::vector<std::size_t>(n, 0));
    r.curves.fn = c.value("fn", std::vector<std::size_t>(n, 0));
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
}

std::string curves_to_csv(const CurveSet& c) {
  std::string s = "threshold,precision,recall,f1\n";
  char line[128];
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f\n", c.thresholds[i], c.precision[i],
                  c.recall[i], c.f1[i]);
    s += line;
  }
  return s;
}

std::string predictions_to_json(std::span<const Detection> dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    arr.push_back({{"image_id", d.image_id},
                   {"x", d.box.x},
                   {"y", d.box.y},
                   {"w", d.box.w},
                   {"h", d.box.h},
                   {"score", d.score},
                   {"class", d.class_id}});
  }
  return arr.dump(1) + "\n";
}

std::vector<Detection> predictions_from_json(std::string_view text) {
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw DataError("predictions: expected a JSON array");
    std::vector<Detection> out;
    for (const auto& j : arr) {
      Detection d;
      d.image_id = j.at("image_id").get<std::string>();
      d.box = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
               j.at("h").get<double>()};
      d.score = j.at("score").get<double>();
      d.class_id = j.at("class").get<int>();
      if (!(d.score >= 0.0 && d.score <= 1.0) || !(d.box.w > 0.0 && d.box.h > 0.0)) {
        throw DataError("predictions: detection on " + d.image_id + " has an invalid score or box");
      }
      out.push_back(std::move(d));
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed predictions JSON: ") + e.what());
  }
}

std::vector<std::pair<Box, double>> mask_regions(std::span<const double> probs, std::size_t width,
                                                 std::size_t height, double thr) {
  if (probs.size() != width * height) {
    throw ShapeError("mask_regions: expected " + std::to_string(width * height) + " values, got " +
                     std::to_string(probs.size()));
  }
  std::vector<int> label(probs.size(), -1);
  std::vector<std::pair<Box, double>> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < probs.size(); ++start) {
    if (probs[start] < thr || label[start] >= 0) continue;
    const int id = static_cast<int>(out.size());
    std::size_t x0 = width, y0 = height, x1 = 0, y1 = 0, n = 0;
    double sum = 0.0;
    stack.assign(1, start);
    label[start] = id;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t x = p % width, y = p / width;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      sum += probs[p];
      ++n;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<long>(width) || ny >= static_cast<long>(height)) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * width + static_cast<std::size_t>(nx);
          if (label[q] >= 0 || probs[q] < thr) continue;
          label[q] = id;
          stack.push_back(q);
        }
      }
    }
    const Box box{static_cast<double>(x0), static_cast<double>(y0),
                  static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)};
    out.emplace_back(box, sum / static_cast<double>(n));
  }
  return out;
}

}  // namespace shadowkit::evalkit
