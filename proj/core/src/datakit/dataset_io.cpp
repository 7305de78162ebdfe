#include "shadowkit/datakit/dataset_io.hpp"

#include <set>
#include <unordered_set>

#include "json.hpp"
#include "shadowkit/datakit/png_io.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/fileio.hpp"

namespace shadowkit::datakit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string image_path(const Sample& s) { return "images/" + s.id + ".png"; }
std::string mask_path(const Sample& s) { return "masks/" + s.id + ".png"; }
std::string pair_path(const Sample& s) { return "shadowfree/" + s.id + ".png"; }

void check_ids(const Dataset& ds) {
  std::unordered_set<std::string> seen;
  for (const Sample& s : ds.samples) {
    if (!valid_sample_id(s.id)) throw DataError("invalid sample id '" + s.id + "'");
    if (!seen.insert(s.id).second) throw DataError("duplicate sample id '" + s.id + "'");
  }
  if (!ds.split) return;
  std::unordered_set<std::string> assigned;
  for (const auto* part : {&ds.split->train, &ds.split->val, &ds.split->test}) {
    for (const auto& id : *part) {
      if (!seen.count(id)) throw DataError("split references unknown sample id '" + id + "'");
      if (!assigned.insert(id).second) throw DataError("sample id '" + id + "' assigned to more than one split");
    }
  }
  if (assigned.size() != seen.size()) throw DataError("split assignment does not cover every sample");
}

ojson ids_json(const std::vector<std::string>& ids) {
  ojson arr = ojson::array();
  for (const auto& id : ids) arr.push_back(id);
  return arr;
}

template <typename T>
T get(const ojson& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw DataError("malformed manifest: " + where + " is missing '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest: " + where + "." + key + ": " + e.what());
  }
}

std::string read_ref(const fs::path& dir, const std::string& rel) {
  const fs::path p = dir / rel;
  if (!fs::exists(p)) throw DataError("missing file: " + p.string());
  return read_file(p);
}

}  // namespace

bool valid_sample_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string manifest_json(const Dataset& ds) {
  ojson root;
  root["format"] = "shadowkit.dataset";
  root["version"] = kManifestVersion;
  root["image_size"] = ds.image_size;
  root["classes"] = ds.class_names;
  ojson samples = ojson::array();
  for (const Sample& s : ds.samples) {
    ojson rec;
    rec["id"] = s.id;
    rec["image"] = image_path(s);
    rec["mask"] = s.mask ? ojson(mask_path(s)) : ojson(nullptr);
    rec["shadow_free"] = s.shadow_free ? ojson(pair_path(s)) : ojson(nullptr);
    ojson boxes = ojson::array();
    for (const auto& lb : s.boxes) {
      ojson b;
      b["x"] = lb.box.x;
      b["y"] = lb.box.y;
      b["w"] = lb.box.w;
      b["h"] = lb.box.h;
      b["class"] = lb.class_id;
      boxes.push_back(std::move(b));
    }
    rec["boxes"] = std::move(boxes);
    if (!s.source.empty()) rec["source"] = s.source;
    samples.push_back(std::move(rec));
  }
  root["samples"] = std::move(samples);
  if (ds.split) {
    ojson sp;
    sp["train"] = ids_json(ds.split->train);
    sp["val"] = ids_json(ds.split->val);
    sp["test"] = ids_json(ds.split->test);
    root["splits"] = std::move(sp);
  }
  return root.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  check_ids(ds);
  for (const Sample& s : ds.samples) validate(s);
  fs::create_directories(dir);
  for (const Sample& s : ds.samples) {
    write_file_atomic(dir / image_path(s), encode_png(s.image));
    if (s.mask) write_file_atomic(dir / mask_path(s), encode_png(*s.mask));
    if (s.shadow_free) write_file_atomic(dir / pair_path(s), encode_png(*s.shadow_free));
  }
  write_file_atomic(dir / kManifestName, manifest_json(ds));
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path mpath = dir / kManifestName;
  if (!fs::exists(mpath)) throw DataError("missing file: " + mpath.string());
  ojson root;
  try {
    root = ojson::parse(read_file(mpath));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed manifest " + mpath.string() + ": " + e.what());
  }
  if (get<std::string>(root, "format", "manifest") != "shadowkit.dataset") {
    throw DataError("malformed manifest " + mpath.string() + ": unexpected format tag");
  }
  if (get<int>(root, "version", "manifest") != kManifestVersion) {
    throw DataError("unsupported manifest version in " + mpath.string());
  }

  Dataset ds;
  ds.image_size = get<std::size_t>(root, "image_size", "manifest");
  ds.class_names = get<std::vector<std::string>>(root, "classes", "manifest");
  const ojson& samples = root.contains("samples") ? root["samples"] : ojson();
  if (!samples.is_array()) throw DataError("malformed manifest: 'samples' must be an array");

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ojson& rec = samples[i];
    const std::string where = "samples[" + std::to_string(i) + "]";
    Sample s;
    s.id = get<std::string>(rec, "id", where);
    if (!valid_sample_id(s.id)) throw DataError("invalid sample id '" + s.id + "' at " + where);
    const std::string img_rel = get<std::string>(rec, "image", where);
    s.image = decode_png_image(read_ref(dir, img_rel), img_rel);
    if (rec.contains("mask") && !rec["mask"].is_null()) {
      const std::string rel = get<std::string>(rec, "mask", where);
      s.mask = decode_png_mask(read_ref(dir, rel), rel);
    }
    if (rec.contains("shadow_free") && !rec["shadow_free"].is_null()) {
      const std::string rel = get<std::string>(rec, "shadow_free", where);
      s.shadow_free = decode_png_image(read_ref(dir, rel), rel);
    }
    const ojson boxes = rec.contains("boxes") ? rec["boxes"] : ojson::array();
    if (!boxes.is_array()) throw DataError("malformed manifest: " + where + ".boxes must be an array");
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      const std::string bw = where + ".boxes[" + std::to_string(b) + "]";
      s.boxes.push_back({Box{get<double>(boxes[b], "x", bw), get<double>(boxes[b], "y", bw),
                             get<double>(boxes[b], "w", bw), get<double>(boxes[b], "h", bw)},
                         get<int>(boxes[b], "class", bw)});
    }
    if (rec.contains("source")) s.source = get<std::string>(rec, "source", where);
    validate(s);
    if (s.image.width != ds.image_size || s.image.height != ds.image_size) {
      throw DataError("sample '" + s.id + "': image is " + std::to_string(s.image.width) + "x" +
                      std::to_string(s.image.height) + ", manifest declares " +
                      std::to_string(ds.image_size));
    }
    ds.samples.push_back(std::move(s));
  }
  if (root.contains("splits")) {
    const ojson& sp = root["splits"];
    SplitAssignment a;
    a.train = get<std::vector<std::string>>(sp, "train", "splits");
    a.val = get<std::vector<std::string>>(sp, "val", "splits");
    a.test = get<std::vector<std::string>>(sp, "test", "splits");
    ds.split = std::move(a);
  }
  check_ids(ds);
  return ds;
}

std::string dataset_hash(const fs::path& dir) {
  const fs::path mpath = dir / kManifestName;
  const std::string manifest = read_file(mpath);
  Fnv1a h;
  h.update(manifest);
  ojson root;
  try {
    root = ojson::parse(manifest);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed manifest " + mpath.string() + ": " + e.what());
  }
  for (const auto& rec : root.value("samples", ojson::array())) {
    for (const char* key : {"image", "mask", "shadow_free"}) {
      if (rec.contains(key) && rec[key].is_string()) h.update(read_ref(dir, rec[key].get<std::string>()));
    }
  }
  return h.hex();
}

}  // namespace shadowkit::datakit
