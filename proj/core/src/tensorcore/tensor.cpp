#include "shadowkit/tensorcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "shadowkit/errors.hpp"

namespace shadowkit::tensorcore {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_dims(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor: shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor: dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_dims(shape_);
  if (data_.size() != numel(shape_)) {
    throw ShapeError("tensor: shape " + shape_string(shape_) + " expects " +
                     std::to_string(numel(shape_)) + " elements, got " +
                     std::to_string(data_.size()));
  }
}

std::span<double> Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw ShapeError("reshape: cannot view " + shape_string(shape_) + " as " +
                     shape_string(shape));
  }
  Tensor out(std::move(shape), data_);
  out.requires_grad_ = requires_grad_;
  return out;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(grad_.begin(), grad_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace shadowkit::tensorcore
