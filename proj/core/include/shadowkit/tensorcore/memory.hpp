#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "shadowkit/tensorcore/tensor.hpp"

namespace shadowkit::tensorcore {

/// Bytes needed to hold float64 tensors of the given shapes.
std::size_t estimate_memory(std::span<const Shape> shapes);

/// Throws BudgetError naming `what` when `required` exceeds `budget`.
void enforce_budget(std::string_view what, std::size_t required, std::size_t budget);

}  // namespace shadowkit::tensorcore
