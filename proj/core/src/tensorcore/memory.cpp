#include "shadowkit/tensorcore/memory.hpp"

#include <string>

#include "shadowkit/errors.hpp"

namespace shadowkit::tensorcore {

std::size_t estimate_memory(std::span<const Shape> shapes) {
  std::size_t total = 0;
  for (const Shape& s : shapes) total += sizeof(double) * numel(s);
  return total;
}

void enforce_budget(std::string_view what, std::size_t required, std::size_t budget) {
  if (required > budget) {
    throw BudgetError(std::string(what) + " needs an estimated " + std::to_string(required) +
                          " bytes, which exceeds the memory budget of " +
                          std::to_string(budget) + " bytes",
                      required, budget);
  }
}

}  // namespace shadowkit::tensorcore
