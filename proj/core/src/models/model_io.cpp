#include "shadowkit/models/model_io.hpp"

#include <charconv>
#include <type_traits>
#include <variant>
#include <json.hpp>

#include "shadowkit/errors.hpp"
#include "shadowkit/fileio.hpp"

namespace shadowkit::models {

using json = nlohmann::ordered_json;

namespace {

json encdec_json(const EncDecSpec& s) {
  return {{"input_size", s.input_size}, {"channels", s.channels}, {"kernel", s.kernel}, {"slope", s.slope}};
}

json disc_json(const DiscriminatorSpec& s) {
  return {{"input_size", s.input_size}, {"channels", s.channels}, {"kernel", s.kernel}, {"slope", s.slope}};
}

json spec_json(const Model& model) {
  if (const auto* m = std::get_if<SegmentationModel>(&model)) return encdec_json(m->spec);
  if (const auto* m = std::get_if<GanModel>(&model)) {
    return {{"generator", encdec_json(m->spec.generator)},
            {"discriminator", disc_json(m->spec.discriminator)},
            {"gain", m->spec.gain},
            {"lambda", m->spec.lambda}};
  }
  const auto& s = std::get<DetectorModel>(model).spec;
  return {{"input_size", s.input_size}, {"channels", s.channels}, {"kernel", s.kernel},
          {"slope", s.slope}, {"class_names", s.class_names}};
}

template <class S>
void read_ladder(const json& j, S& s) {
  s.input_size = j.at("input_size").get<std::size_t>();
  s.channels = j.at("channels").get<std::vector<std::size_t>>();
  s.kernel = j.at("kernel").get<std::size_t>();
  s.slope = j.at("slope").get<double>();
}

std::string double_string(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_net(json& out, const std::string& prefix, const Network& net) {
  const auto& names = net.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor& t = net.parameters()[i];
    json data = json::array();
    for (double v : t.data()) data.push_back(double_string(v));
    out.push_back({{"name", prefix + names[i]}, {"shape", t.shape()}, {"data", std::move(data)}});
  }
}

void read_net(const json& weights, std::size_t& pos, const std::string& prefix, Network& net,
              const std::string& source) {
  const auto& names = net.parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i, ++pos) {
    if (pos >= weights.size()) {
      throw DataError(source + ": missing weight " + prefix + names[i]);
    }
    const json& w = weights[pos];
    const auto name = w.at("name").get<std::string>();
    if (name != prefix + names[i]) {
      throw DataError(source + ": expected weight " + prefix + names[i] + ", found " + name);
    }
    Tensor& t = net.parameters()[i];
    const auto shape = w.at("shape").get<tensorcore::Shape>();
    if (shape != t.shape()) {
      throw DataError(source + ": weight " + name + " has shape " + tensorcore::shape_string(shape) +
                      ", spec needs " + tensorcore::shape_string(t.shape()));
    }
    const json& data = w.at("data");
    if (data.size() != t.size()) {
      throw DataError(source + ": weight " + name + " has " + std::to_string(data.size()) +
                      " values, expected " + std::to_string(t.size()));
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& str = data[k].get_ref<const std::string&>();
      double v = 0.0;
      auto res = std::from_chars(str.data(), str.data() + str.size(), v);
      if (res.ec != std::errc() || res.ptr != str.data() + str.size()) {
        throw DataError(source + ": weight " + name + " has a malformed value '" + str + "'");
      }
      t[k] = v;
    }
  }
}

}  // namespace

std::string model_spec_json(const Model& model) { return spec_json(model).dump(); }

std::string model_to_json(const Model& model) {
  json doc;
  doc["format"] = "shadowkit.model";
  doc["version"] = 1;
  doc["family"] = family_name(model);
  doc["spec"] = spec_json(model);
  json weights = json::array();
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GanModel>) {
          write_net(weights, "generator.", m.generator);
          write_net(weights, "discriminator.", m.discriminator);
        } else {
          write_net(weights, "", m.net);
        }
      },
      model);
  doc["weights"] = std::move(weights);
  return doc.dump(1) + "\n";
}

Model model_from_json(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(source + ": malformed model JSON: " + e.what());
  }
  try {
    if (doc.value("format", "") != "shadowkit.model") {
      throw DataError(source + ": not a shadowkit model file");
    }
    if (doc.at("version").get<int>() != 1) throw DataError(source + ": unsupported model version");
    const auto family = doc.at("family").get<std::string>();
    const json& spec = doc.at("spec");
    const json& weights = doc.at("weights");
    std::size_t pos = 0;
    Model model;
    if (family == "segmentation") {
      EncDecSpec s;
      read_ladder(spec, s);
      SegmentationModel m(s);
      read_net(weights, pos, "", m.net, source);
      model = std::move(m);
    } else if (family == "gan") {
      GanSpec s;
      read_ladder(spec.at("generator"), s.generator);
      read_ladder(spec.at("discriminator"), s.discriminator);
      s.gain = spec.at("gain").get<double>();
      s.lambda = spec.at("lambda").get<double>();
      s.validate();
      GanModel m(s);
      read_net(weights, pos, "generator.", m.generator, source);
      read_net(weights, pos, "discriminator.", m.discriminator, source);
      model = std::move(m);
    } else if (family == "detector") {
      DetectorSpec s;
      read_ladder(spec, s);
      s.class_names = spec.at("class_names").get<std::vector<std::string>>();
      DetectorModel m(s);
      read_net(weights, pos, "", m.net, source);
      model = std::move(m);
    } else {
      throw DataError(source + ": unknown model family '" + family + "'");
    }
    if (pos != weights.size()) throw DataError(source + ": unexpected extra weights");
    return model;
  } catch (const json::exception& e) {
    throw DataError(source + ": malformed model: " + e.what());
  } catch (const RangeError& e) {
    throw DataError(source + ": invalid spec: " + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

Model load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path), path.string());
}

}  // namespace shadowkit::models
