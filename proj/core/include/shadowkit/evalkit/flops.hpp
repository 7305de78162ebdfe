#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shadowkit/layer_table.hpp"

namespace shadowkit::evalkit {

struct LayerFlops {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  tensorcore::Shape output;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
};

struct FlopsReport {
  std::vector<LayerFlops> layers;
  std::uint64_t total = 0;
  std::uint64_t params = 0;
};

/// Operations of one layer for a single input, multiply-add counted as 2:
///   conv   2 K^2 Cin Cout Ho Wo (+ Cout Ho Wo with bias)
///   linear 2 F G (+ G with bias)
///   activation, pool, upsample: one per output element; flatten: 0.
std::uint64_t layer_flops(const LayerInfo& layer);

FlopsReport flops(const LayerTable& table);

/// Fixed-width per-layer table with a total line.
std::string flops_table(const FlopsReport& report);
std::string flops_json(const FlopsReport& report);

}  // namespace shadowkit::evalkit
