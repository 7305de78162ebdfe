#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "shadowkit/errors.hpp"
#include "shadowkit/models/network.hpp"
#include "shadowkit/tensorcore/memory.hpp"
#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::models {

namespace t = tensorcore;

LayerDef conv_layer(std::string name, std::size_t out, std::size_t kernel, int stride, int pad) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Conv;
  d.out = out;
  d.kernel = kernel;
  d.stride = stride;
  d.pad = pad;
  return d;
}

LayerDef linear_layer(std::string name, std::size_t out) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Linear;
  d.out = out;
  return d;
}

LayerDef leaky_layer(std::string name, double slope) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Activation;
  d.activation = Activation::LeakyRelu;
  d.slope = slope;
  return d;
}

LayerDef sigmoid_layer(std::string name) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Activation;
  d.activation = Activation::Sigmoid;
  return d;
}

LayerDef pool_layer(std::string name) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Pool;
  d.kernel = 2;
  d.stride = 2;
  return d;
}

LayerDef upsample_layer(std::string name) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Upsample;
  return d;
}

LayerDef flatten_layer(std::string name) {
  LayerDef d;
  d.name = std::move(name);
  d.kind = LayerKind::Flatten;
  return d;
}

Network::Network(Shape input, std::vector<LayerDef> layers)
    : input_(std::move(input)), layers_(std::move(layers)) {
  if (input_.empty() || t::numel(input_) == 0) {
    throw ShapeError("network: input expected non-empty shape, got " + t::shape_string(input_));
  }
  Shape cur = input_;
  for (const LayerDef& d : layers_) {
    LayerInfo info;
    info.name = d.name;
    info.kind = d.kind;
    info.input = cur;
    info.kernel = d.kernel;
    info.bias = d.bias;
    const std::string where = "network layer " + d.name;
    switch (d.kind) {
      case LayerKind::Conv: {
        if (cur.size() != 3) throw ShapeError(where + ": conv expected [C,H,W], got " + t::shape_string(cur));
        if (d.out == 0 || d.kernel == 0 || d.stride < 1 || d.pad < 0) {
          throw ShapeError(where + ": conv needs out >= 1, kernel >= 1, stride >= 1, pad >= 0");
        }
        const std::size_t ho = t::conv_output_size(cur[1], d.kernel, d.stride, d.pad);
        const std::size_t wo = t::conv_output_size(cur[2], d.kernel, d.stride, d.pad);
        info.in_features = cur[0];
        info.out_features = d.out;
        info.params.push_back({d.out, cur[0], d.kernel, d.kernel});
        if (d.bias) info.params.push_back({d.out});
        cur = {d.out, ho, wo};
        break;
      }
      case LayerKind::Linear: {
        if (cur.size() != 1) throw ShapeError(where + ": linear expected [F], got " + t::shape_string(cur));
        if (d.out == 0) throw ShapeError(where + ": linear needs out >= 1");
        info.in_features = cur[0];
        info.out_features = d.out;
        info.params.push_back({cur[0], d.out});
        if (d.bias) info.params.push_back({d.out});
        cur = {d.out};
        break;
      }
      case LayerKind::Activation:
        break;
      case LayerKind::Pool:
        if (cur.size() != 3 || cur[1] % 2 != 0 || cur[2] % 2 != 0) {
          throw ShapeError(where + ": maxpool expected [C,H,W] with even H and W, got " +
                           t::shape_string(cur));
        }
        cur = {cur[0], cur[1] / 2, cur[2] / 2};
        break;
      case LayerKind::Upsample:
        if (cur.size() != 3) throw ShapeError(where + ": upsample expected [C,H,W], got " + t::shape_string(cur));
        cur = {cur[0], cur[1] * 2, cur[2] * 2};
        break;
      case LayerKind::Flatten:
        cur = {t::numel(cur)};
        break;
    }
    info.output = cur;
    for (std::size_t p = 0; p < info.params.size(); ++p) {
      params_.emplace_back(info.params[p]);
      names_.push_back(d.name + (p == 0 ? ".weight" : ".bias"));
    }
    table_.push_back(std::move(info));
  }
  set_trainable(true);
}

std::vector<Tensor*> Network::parameter_ptrs() {
  std::vector<Tensor*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

Tensor* Network::find(const std::string& name) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return &params_[i];
  return nullptr;
}

void Network::init_he(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (p.rank() == 1) {
      std::fill(p.storage().begin(), p.storage().end(), 0.0);
      continue;
    }
    // conv [Cout, Cin, K, K] fans in Cin*K*K; linear [F, G] fans in F.
    const std::size_t fan_in = p.rank() == 4 ? p.dim(1) * p.dim(2) * p.dim(3) : p.dim(0);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& v : p.storage()) v = dist(rng);
  }
}

void Network::fill(double value) {
  for (auto& p : params_) std::fill(p.storage().begin(), p.storage().end(), value);
}

void Network::set_trainable(bool on) {
  for (auto& p : params_) p.set_requires_grad(on);
}

Var Network::forward(Tape& tape, Var x) {
  const Shape& xs = x.shape();
  if (xs.size() != input_.size() + 1 || !std::equal(input_.begin(), input_.end(), xs.begin() + 1)) {
    Shape expected{0};
    expected.insert(expected.end(), input_.begin(), input_.end());
    std::string want = t::shape_string(expected);
    want.replace(1, 1, "N");
    throw ShapeError("network: input expected " + want + ", got " + t::shape_string(xs));
  }
  std::size_t pi = 0;
  for (const LayerDef& d : layers_) {
    switch (d.kind) {
      case LayerKind::Conv:
      case LayerKind::Linear: {
        Var w = tape.parameter(params_[pi++]);
        Var b = d.bias ? tape.parameter(params_[pi++]) : tape.constant(Tensor({d.out}, 0.0));
        x = d.kind == LayerKind::Conv ? t::conv2d(x, w, b, d.stride, d.pad) : t::linear(x, w, b);
        break;
      }
      case LayerKind::Activation:
        x = d.activation == Activation::Sigmoid ? t::sigmoid(x) : t::leaky_relu(x, d.slope);
        break;
      case LayerKind::Pool:
        x = t::maxpool2d(x, 2, 2);
        break;
      case LayerKind::Upsample:
        x = t::upsample_nearest2x(x);
        break;
      case LayerKind::Flatten:
        x = t::flatten(x);
        break;
    }
  }
  return x;
}

std::vector<Shape> training_shapes(const Network& net, std::size_t batch) {
  auto batched = [batch](const Shape& s) {
    Shape b{batch};
    b.insert(b.end(), s.begin(), s.end());
    return b;
  };
  std::vector<Shape> shapes{batched(net.input_shape())};
  for (const auto& info : net.table()) shapes.push_back(batched(info.output));
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& p : net.parameters()) shapes.push_back(p.shape());
  return shapes;
}

std::size_t training_memory(const Network& net, std::size_t batch) {
  const auto shapes = training_shapes(net, batch);
  return t::estimate_memory(shapes);
}

}  // namespace shadowkit::models
