#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "shadowkit/tensorcore/ops.hpp"

namespace shadowkit::testing {

using tensorcore::Shape;
using tensorcore::Tape;
using tensorcore::Tensor;
using tensorcore::Var;

/// Builds the output of the operator under test from leaf inputs.
using OpFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.storage()) v = u(rng);
  return t;
}

/// <y, r> for a fixed projection r, so every output element gets a distinct
/// upstream gradient.
inline Var project(Tape& tape, Var y, const std::vector<double>& r) {
  const std::size_t id = y.id();
  double s = 0.0;
  const auto v = y.value().data();
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * r[i];
  return tape.record("project", Tensor::scalar(s), {id}, [id, r](Tape& t, std::span<const double> g) {
    auto d = t.accumulate(id);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[0] * r[i];
  });
}

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

/// Central differences against reverse mode for every element of every
/// input. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck check_gradients(const OpFn& op, const std::vector<Tensor>& inputs,
                                 std::uint64_t seed, double h = 1e-5, double floor = 1e-3) {
  std::vector<double> proj;
  {
    Tape probe;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(probe.leaf(t, false));
    const std::size_t n = op(probe, vars).value().size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) proj.push_back(u(rng));
  }
  auto loss_at = [&](const std::vector<Tensor>& in) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : in) vars.push_back(tape.leaf(t, false));
    Var y = op(tape, vars);
    return y.value().size() == 1 && proj.size() == 1 ? y.value()[0] * proj[0]
                                                     : project(tape, y, proj).value()[0];
  };

  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t, true));
  Var loss = project(tape, op(tape, vars), proj);
  tensorcore::backward(loss);

  GradCheck r;
  std::vector<Tensor> work = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto analytic = vars[k].grad();
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double orig = work[k][i];
      work[k][i] = orig + h;
      const double fp = loss_at(work);
      work[k][i] = orig - h;
      const double fm = loss_at(work);
      work[k][i] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      const double abs_err = std::abs(a - num);
      r.max_abs_error = std::max(r.max_abs_error, abs_err);
      r.max_rel_error =
          std::max(r.max_rel_error, abs_err / std::max({std::abs(a), std::abs(num), floor}));
    }
  }
  return r;
}

}  // namespace shadowkit::testing
