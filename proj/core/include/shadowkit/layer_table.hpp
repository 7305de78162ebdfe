#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "shadowkit/tensorcore/tensor.hpp"

namespace shadowkit {

enum class LayerKind { Conv, Linear, Activation, Pool, Upsample, Flatten };

std::string to_string(LayerKind kind);

/// One layer of a model as seen by a single input example (no batch dim).
struct LayerInfo {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  tensorcore::Shape input;
  tensorcore::Shape output;
  std::size_t in_features = 0;   // Cin for conv, F for linear
  std::size_t out_features = 0;  // Cout for conv, G for linear
  std::size_t kernel = 0;
  bool bias = false;
  std::vector<tensorcore::Shape> params;
};

using LayerTable = std::vector<LayerInfo>;

}  // namespace shadowkit
