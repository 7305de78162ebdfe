#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shadowkit {

/// Raised when an operator receives tensors whose dimensions violate its
/// contract. The message always names the operator, the expected dims and
/// the dims it actually got.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation would allocate more than the configured memory
/// budget. Carries the estimate so callers can report it.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::size_t required, std::size_t budget)
      : std::runtime_error(what), required_(required), budget_(budget) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t required_;
  std::size_t budget_;
};

/// Dataset, manifest and model-file problems (missing files, malformed JSON,
/// duplicate ids, labels out of bounds, missing masks/pairs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside their documented range.
class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace shadowkit
