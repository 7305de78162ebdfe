#include "shadowkit/evalkit/flops.hpp"

#include <cstdio>
#include <json.hpp>

namespace shadowkit::evalkit {

std::uint64_t layer_flops(const LayerInfo& l) {
  const std::uint64_t out = tensorcore::numel(l.output);
  switch (l.kind) {
    case LayerKind::Conv: {
      const std::uint64_t hw = out / l.out_features;
      const std::uint64_t k2 = static_cast<std::uint64_t>(l.kernel) * l.kernel;
      return 2 * k2 * l.in_features * l.out_features * hw + (l.bias ? out : 0);
    }
    case LayerKind::Linear:
      return 2ULL * l.in_features * l.out_features + (l.bias ? l.out_features : 0);
    case LayerKind::Activation:
    case LayerKind::Pool:
    case LayerKind::Upsample:
      return out;
    case LayerKind::Flatten:
      return 0;
  }
  return 0;
}

FlopsReport flops(const LayerTable& table) {
  FlopsReport r;
  for (const auto& l : table) {
    LayerFlops f;
    f.name = l.name;
    f.kind = l.kind;
    f.output = l.output;
    f.flops = layer_flops(l);
    for (const auto& p : l.params) f.params += tensorcore::numel(p);
    r.total += f.flops;
    r.params += f.params;
    r.layers.push_back(std::move(f));
  }
  return r;
}

std::string flops_table(const FlopsReport& r) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-10s %-14s %12s %16s\n", "layer", "kind", "output",
                "params", "flops");
  s += line;
  for (const auto& l : r.layers) {
    std::snprintf(line, sizeof line, "%-28s %-10s %-14s %12llu %16llu\n", l.name.c_str(),
                  to_string(l.kind).c_str(), tensorcore::shape_string(l.output).c_str(),
                  static_cast<unsigned long long>(l.params),
                  static_cast<unsigned long long>(l.flops));
    s += line;
  }
  std::snprintf(line, sizeof line, "%-28s %-10s %-14s %12llu %16llu\n", "total", "", "",
                static_cast<unsigned long long>(r.params), static_cast<unsigned long long>(r.total));
  s += line;
  return s;
}

std::string flops_json(const FlopsReport& r) {
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"name", l.name},
                      {"kind", to_string(l.kind)},
                      {"output", l.output},
                      {"params", l.params},
                      {"flops", l.flops}});
  }
  nlohmann::ordered_json doc{{"layers", layers}, {"total_params", r.params}, {"total_flops", r.total}};
  return doc.dump(2) + "\n";
}

}  // namespace shadowkit::evalkit
