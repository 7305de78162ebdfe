#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shadowkit/layer_table.hpp"
#include "shadowkit/tensorcore/tape.hpp"

namespace shadowkit::models {

using tensorcore::Shape;
using tensorcore::Tape;
using tensorcore::Tensor;
using tensorcore::Var;

enum class Activation { LeakyRelu, Sigmoid };

/// One step of a sequential network.
struct LayerDef {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  std::size_t out = 0;  // output channels (conv) or features (linear)
  std::size_t kernel = 0;
  int stride = 1;
  int pad = 0;
  Activation activation = Activation::LeakyRelu;
  double slope = 0.1;
  bool bias = true;
};

LayerDef conv_layer(std::string name, std::size_t out, std::size_t kernel, int stride, int pad);
LayerDef linear_layer(std::string name, std::size_t out);
LayerDef leaky_layer(std::string name, double slope);
LayerDef sigmoid_layer(std::string name);
LayerDef pool_layer(std::string name);
LayerDef upsample_layer(std::string name);
LayerDef flatten_layer(std::string name);

/// A straight chain of layers over a fixed per-example input shape.
///
/// Owns its parameters (weight then bias per conv/linear layer, in layer
/// order) and a layer table describing every step.
class Network {
 public:
  Network() = default;
  /// `input` is the per-example shape, e.g. {3, 64, 64}. Throws ShapeError if
  /// a layer does not fit the shape flowing into it.
  Network(Shape input, std::vector<LayerDef> layers);

  const Shape& input_shape() const noexcept { return input_; }
  const Shape& output_shape() const noexcept { return table_.empty() ? input_ : table_.back().output; }
  const std::vector<LayerDef>& layers() const noexcept { return layers_; }
  const LayerTable& table() const noexcept { return table_; }

  std::vector<Tensor>& parameters() noexcept { return params_; }
  const std::vector<Tensor>& parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept { return names_; }
  std::vector<Tensor*> parameter_ptrs();
  std::size_t parameter_count() const;
  /// Parameter by name or nullptr.
  Tensor* find(const std::string& name);

  /// He-normal weights (std sqrt(2 / fan_in)), zero biases.
  void init_he(std::uint64_t seed);
  void fill(double value);
  void set_trainable(bool on);

  /// Runs the chain on a batch [N, input...].
  Var forward(Tape& tape, Var x);

 private:
  Shape input_;
  std::vector<LayerDef> layers_;
  LayerTable table_;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
};

/// Byte estimate of one training step on a batch: the input, every layer
/// output, the parameters and their gradients.
std::size_t training_memory(const Network& net, std::size_t batch);

/// Shapes behind training_memory, batch dimension included.
std::vector<Shape> training_shapes(const Network& net, std::size_t batch);

}  // namespace shadowkit::models
