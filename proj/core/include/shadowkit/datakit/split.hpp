#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "shadowkit/datakit/sample.hpp"

namespace shadowkit::datakit {

struct SplitRatios {
  double train = 8.0;
  double val = 1.0;
  double test = 1.0;
};

/// Parses "8:1:1". Throws RangeError on malformed or non-positive parts.
SplitRatios parse_ratios(const std::string& text);

/// (train, val, test) sizes: val and test are round(n * r / sum(r)); train
/// takes the remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Seeded shuffle of the sample ids followed by a contiguous partition.
/// Throws DataError on an empty dataset and RangeError on bad ratios.
SplitAssignment split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace shadowkit::datakit
