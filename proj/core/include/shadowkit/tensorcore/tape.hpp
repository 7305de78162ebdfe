#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shadowkit/tensorcore/tensor.hpp"

namespace shadowkit::tensorcore {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t dim(std::size_t i) const { return value().dim(i); }
  bool requires_grad() const;
  /// Gradient accumulated by the last backward pass (empty if none reached it).
  std::span<const double> grad() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records a forward computation as a list of nodes in execution order and
/// replays it in reverse to accumulate gradients.
///
/// Nodes only reference earlier nodes, so recording order is already a
/// topological order. A backward pass visits every node exactly once. The
/// tape also enforces a memory budget: a node whose value (plus its future
/// gradient) would push the total past the budget is refused with a
/// BudgetError before anything is allocated.
class Tape {
 public:
  /// Called with the tape and the gradient flowing into the node; must add
  /// the contributions of its parents via accumulate().
  using BackwardFn = std::function<void(Tape&, std::span<const double>)>;

  static constexpr std::size_t kDefaultBudget = std::size_t{2} << 30;

  explicit Tape(std::size_t budget_bytes = kDefaultBudget) : budget_(budget_bytes) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A value that never receives a gradient.
  Var constant(Tensor value);
  /// A leaf owned by the tape; its gradient is readable through Var::grad().
  Var leaf(Tensor value, bool requires_grad);
  /// A leaf aliasing a caller-owned tensor. After backward() the gradient is
  /// added into `param.grad()` if `param.requires_grad()`.
  Var parameter(Tensor& param);

  /// Throws BudgetError if a node of this shape cannot be afforded.
  void reserve(std::string_view op, const Shape& shape) const;

  Var record(std::string_view op, Tensor value, std::vector<std::size_t> parents,
             BackwardFn backward);

  /// Runs reverse accumulation from a scalar loss.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::span<const double> grad(std::size_t id) const { return nodes_.at(id).grad; }
  /// Gradient buffer of node `id`, zero-initialised on first use.
  std::span<double> accumulate(std::size_t id);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t bytes() const noexcept { return bytes_; }
  std::size_t budget() const noexcept { return budget_; }
  std::string_view op_name(std::size_t id) const { return nodes_.at(id).op; }

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor* external = nullptr;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::size_t bytes_ = 0;
  std::size_t budget_;
  bool backward_done_ = false;
};

}  // namespace shadowkit::tensorcore
