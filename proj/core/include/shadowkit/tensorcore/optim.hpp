#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shadowkit/tensorcore/tensor.hpp"

namespace shadowkit::tensorcore {

enum class OptimizerKind { SgdMomentum, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::SgdMomentum;
  double lr = 0.05;
  double momentum = 0.9;  // SGD only
  double beta1 = 0.9;     // Adam only
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Per-parameter auxiliary buffers (velocity for SGD, first/second moments
/// for Adam), one per trainable parameter and shaped like it.
class OptimizerState {
 public:
  OptimizerState(OptimizerConfig config, std::span<Tensor* const> params);

  const OptimizerConfig& config() const noexcept { return config_; }
  void set_lr(double lr) noexcept { config_.lr = lr; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  friend void step(std::span<Tensor* const> params, OptimizerState& state);

  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

/// SGD with momentum: v <- mu v - lr g; p <- p + v.
/// Adam: standard moments with bias correction.
/// Parameters without a gradient buffer are treated as having a zero gradient.
void step(std::span<Tensor* const> params, OptimizerState& state);

void zero_grad(std::span<Tensor* const> params);

}  // namespace shadowkit::tensorcore
