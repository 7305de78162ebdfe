#include "shadowkit/datakit/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "shadowkit/errors.hpp"

namespace shadowkit::datakit {

namespace {

void check(const SplitRatios& r) {
  if (!(r.train > 0.0 && r.val > 0.0 && r.test > 0.0)) {
    throw RangeError("split ratios must all be positive");
  }
}

}  // namespace

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw RangeError("malformed ratio '" + text + "' (expected e.g. 8:1:1)");
    }
  }
  if (parts.size() != 3) throw RangeError("malformed ratio '" + text + "' (expected three parts)");
  SplitRatios r{parts[0], parts[1], parts[2]};
  check(r);
  return r;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& r) {
  check(r);
  const double total = r.train + r.val + r.test;
  const double nd = static_cast<double>(n);
  auto val = static_cast<std::size_t>(std::llround(nd * r.val / total));
  auto test = static_cast<std::size_t>(std::llround(nd * r.test / total));
  while (val + test > n) {
    if (test >= val && test > 0) --test;
    else --val;
  }
  return {n - val - test, val, test};
}

SplitAssignment split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  if (ds.samples.empty()) throw DataError("cannot split an empty dataset");
  const auto sizes = split_sizes(ds.samples.size(), ratios);
  std::vector<std::size_t> order(ds.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitAssignment out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& id = ds.samples[order[i]].id;
    if (i < sizes[0]) out.train.push_back(id);
    else if (i < sizes[0] + sizes[1]) out.val.push_back(id);
    else out.test.push_back(id);
  }
  return out;
}

}  // namespace shadowkit::datakit
