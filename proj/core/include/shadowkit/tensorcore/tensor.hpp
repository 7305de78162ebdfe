#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace shadowkit::tensorcore {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float64 array.
///
/// `grad` is empty unless a backward pass has written into it; when present
/// it always has as many elements as `data`.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on) noexcept { requires_grad_ = on; }

  bool has_grad() const noexcept { return !grad_.empty(); }
  std::span<double> grad() noexcept { return grad_; }
  std::span<const double> grad() const noexcept { return grad_; }
  /// Allocates a zeroed gradient buffer if none exists yet.
  std::span<double> ensure_grad();
  void clear_grad() noexcept { grad_.clear(); }

  /// Same data, new shape with identical element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
  bool requires_grad_ = false;
};

}  // namespace shadowkit::tensorcore
