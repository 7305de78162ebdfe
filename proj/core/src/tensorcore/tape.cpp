#include "shadowkit/tensorcore/tape.hpp"

#include <algorithm>

#include "shadowkit/errors.hpp"

namespace shadowkit::tensorcore {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }
std::span<const double> Var::grad() const { return tape_->grad(id_); }

void Tape::reserve(std::string_view op, const Shape& shape) const {
  // A node may later need a gradient of the same size.
  const std::size_t need = 2 * sizeof(double) * numel(shape);
  if (bytes_ + need > budget_) {
    throw BudgetError(std::string(op) + ": allocating " + shape_string(shape) +
                          " needs " + std::to_string(bytes_ + need) +
                          " bytes, budget is " + std::to_string(budget_),
                      bytes_ + need, budget_);
  }
}

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  reserve("leaf", value.shape());
  bytes_ += sizeof(double) * value.size() * (requires_grad ? 2 : 1);
  Node node;
  node.op = "leaf";
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor& param) {
  Node node;
  node.op = "parameter";
  node.external = &param;
  node.requires_grad = param.requires_grad();
  if (node.requires_grad) bytes_ += sizeof(double) * param.size();
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor value, std::vector<std::size_t> parents,
                 BackwardFn backward) {
  const std::size_t id = nodes_.size();
  bool needs_grad = false;
  for (auto p : parents) {
    if (p >= id) throw std::logic_error("tape: node may only reference earlier nodes");
    needs_grad = needs_grad || nodes_[p].requires_grad;
  }
  reserve(op, value.shape());
  bytes_ += sizeof(double) * value.size() * (needs_grad ? 2 : 1);
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.parents = std::move(parents);
  node.requires_grad = needs_grad;
  if (needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, id);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.external ? *n.external : n.value;
}

std::span<double> Tape::accumulate(std::size_t id) {
  Node& n = nodes_.at(id);
  const std::size_t sz = n.external ? n.external->size() : n.value.size();
  if (n.grad.size() != sz) n.grad.assign(sz, 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw std::logic_error("backward: loss was recorded on another tape");
  const Tensor& lv = value(loss.id());
  if (lv.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_string(lv.shape()));
  }
  if (backward_done_) throw std::logic_error("backward: tape was already replayed");
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;

  accumulate(loss.id())[0] += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.external && n.external->requires_grad()) {
      auto dst = n.external->ensure_grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
    }
  }
}

}  // namespace shadowkit::tensorcore
