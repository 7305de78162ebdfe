#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "shadowkit/datakit/sample.hpp"
#include "shadowkit/errors.hpp"

namespace shadowkit::datakit {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

void validate(const Sample& s) {
  const auto fail = [&](const std::string& what) {
    throw DataError("sample '" + s.id + "': " + what);
  };
  const Image& im = s.image;
  if (im.width == 0 || im.height == 0) fail("empty image");
  if (im.pixels.size() != im.width * im.height * im.channels) fail("pixel buffer size mismatch");
  for (double v : im.pixels)
    if (!(v >= 0.0 && v <= 1.0)) fail("pixel value outside [0,1]");
  if (s.mask) {
    if (s.mask->width != im.width || s.mask->height != im.height) fail("mask dims differ from image");
    for (auto b : s.mask->bits)
      if (b > 1) fail("mask value is not binary");
  }
  if (s.shadow_free) {
    if (s.shadow_free->width != im.width || s.shadow_free->height != im.height ||
        s.shadow_free->channels != im.channels) {
      fail("shadow-free pair dims differ from image");
    }
  }
  const double W = static_cast<double>(im.width), H = static_cast<double>(im.height);
  for (std::size_t i = 0; i < s.boxes.size(); ++i) {
    const Box& b = s.boxes[i].box;
    const std::string tag = "box " + std::to_string(i);
    if (!(b.w > 0.0 && b.h > 0.0)) fail(tag + " has non-positive size");
    if (b.x < 0.0 || b.y < 0.0 || b.right() > W + 1e-9 || b.bottom() > H + 1e-9) {
      fail(tag + " lies outside the image");
    }
    if (s.boxes[i].class_id < 0) fail(tag + " has a negative class id");
  }
}

std::vector<const Sample*> Dataset::subset(const std::string& split_name) const {
  std::vector<const Sample*> out;
  if (split_name == "all") {
    for (const Sample& s : samples) out.push_back(&s);
    return out;
  }
  if (!split) throw DataError("dataset has no split assignment (requested split '" + split_name + "')");
  const std::vector<std::string>* ids = nullptr;
  if (split_name == "train") ids = &split->train;
  else if (split_name == "val") ids = &split->val;
  else if (split_name == "test") ids = &split->test;
  else throw DataError("unknown split '" + split_name + "'");

  std::unordered_map<std::string, const Sample*> by_id;
  for (const Sample& s : samples) by_id.emplace(s.id, &s);
  for (const auto& id : *ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("split '" + split_name + "' references unknown id '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

Dataset Dataset::extract(const std::string& split_name) const {
  Dataset out;
  out.image_size = image_size;
  out.class_names = class_names;
  for (const Sample* s : subset(split_name)) out.samples.push_back(*s);
  return out;
}

}  // namespace shadowkit::datakit
