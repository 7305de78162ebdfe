#include "shadowkit/tensorcore/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "shadowkit/errors.hpp"

namespace shadowkit::tensorcore {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd-momentum";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd-momentum" || name == "sgd") return OptimizerKind::SgdMomentum;
  throw RangeError("unknown optimizer '" + name + "' (expected sgd-momentum or adam)");
}

OptimizerState::OptimizerState(OptimizerConfig config, std::span<Tensor* const> params)
    : config_(config) {
  if (!(config_.lr >= 0.0)) throw RangeError("optimizer: learning rate must be >= 0");
  for (const Tensor* p : params) {
    first_.emplace_back(p->size(), 0.0);
    if (config_.kind == OptimizerKind::Adam) second_.emplace_back(p->size(), 0.0);
  }
}

void step(std::span<Tensor* const> params, OptimizerState& state) {
  if (params.size() != state.first_.size()) {
    throw std::invalid_argument("optimizer: state was built for " +
                                std::to_string(state.first_.size()) + " parameters, got " +
                                std::to_string(params.size()));
  }
  const OptimizerConfig& c = state.config_;
  ++state.steps_;
  const double t = static_cast<double>(state.steps_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    auto& m = state.first_[i];
    if (m.size() != p.size()) {
      throw ShapeError("optimizer: buffer for parameter " + std::to_string(i) + " has " +
                       std::to_string(m.size()) + " elements, parameter has " +
                       std::to_string(p.size()));
    }
    if (!p.has_grad()) continue;
    auto w = p.data();
    const auto g = p.grad();
    if (c.kind == OptimizerKind::SgdMomentum) {
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = c.momentum * m[k] - c.lr * g[k];
        w[k] += m[k];
      }
    } else {
      auto& v = state.second_[i];
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        w[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
      }
    }
  }
}

void zero_grad(std::span<Tensor* const> params) {
  for (Tensor* p : params) p->clear_grad();
}

}  // namespace shadowkit::tensorcore
