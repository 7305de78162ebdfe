#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/tensorcore/memory.hpp"
#include "shadowkit/tensorcore/ops.hpp"
#include "shadowkit/tensorcore/optim.hpp"

using namespace shadowkit;
using namespace shadowkit::tensorcore;
using shadowkit::testing::check_gradients;
using shadowkit::testing::random_tensor;

namespace {

Tensor t(Shape s, std::vector<double> v) { return Tensor(std::move(s), std::move(v)); }

std::vector<double> values(Var v) {
  const auto d = v.value().data();
  return {d.begin(), d.end()};
}

// Entries spaced at least 0.05 apart so finite differences never cross a tie.
Tensor separated(const Shape& s, std::mt19937_64& rng) {
  Tensor out(s);
  std::vector<double> vals(out.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.05 * static_cast<double>(i) - 0.4;
  std::shuffle(vals.begin(), vals.end(), rng);
  out.storage() = vals;
  return out;
}

}  // namespace

TEST_SUITE("tensorcore") {

TEST_CASE("tensor rejects zero dims and mismatched data") {
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor a({2, 3}, 1.5);
  CHECK(a.size() == 6);
  CHECK_FALSE(a.has_grad());
}

TEST_CASE("conv2d shape and 1x1 example") {
  Tape tape;
  Var x = tape.constant(Tensor({1, 3, 64, 64}));
  Var w = tape.constant(Tensor({16, 3, 3, 3}));
  Var b = tape.constant(Tensor({16}));
  CHECK(conv2d(x, w, b, 1, 1).shape() == Shape{1, 16, 64, 64});

  Var x2 = tape.constant(t({1, 1, 2, 2}, {1, 2, 3, 4}));
  Var y = conv2d(x2, tape.constant(t({1, 1, 1, 1}, {2})), tape.constant(t({1}, {0})), 1, 0);
  CHECK(values(y) == std::vector<double>{2, 4, 6, 8});
}

TEST_CASE("conv2d shape formula over an exhaustive small range") {
  for (std::size_t k = 1; k <= 4; ++k)
    for (int stride = 1; stride <= 2; ++stride)
      for (int pad = 0; pad <= 2; ++pad)
        for (std::size_t h = k; h <= 8; ++h)
          for (std::size_t w = k; w <= 8; ++w) {
            Tape tape;
            Var y = conv2d(tape.constant(Tensor({1, 1, h, w}, 1.0)), tape.constant(Tensor({2, 1, k, k}, 1.0)),
                           tape.constant(Tensor({2})), stride, pad);
            REQUIRE(y.dim(2) == (h + 2 * pad - k) / stride + 1);
            REQUIRE(y.dim(3) == (w + 2 * pad - k) / stride + 1);
            const long expect_h = (static_cast<long>(h) - 1) * stride - 2 * pad + static_cast<long>(k);
            const long expect_w = (static_cast<long>(w) - 1) * stride - 2 * pad + static_cast<long>(k);
            if (expect_h < 1 || expect_w < 1) continue;
            Var z = conv_transpose2d(tape.constant(Tensor({1, 1, h, w}, 1.0)),
                                     tape.constant(Tensor({1, 2, k, k}, 1.0)), stride, pad);
            REQUIRE(static_cast<long>(z.dim(2)) == expect_h);
            REQUIRE(static_cast<long>(z.dim(3)) == expect_w);
          }
}

TEST_CASE("conv2d shape errors name the operator and dims") {
  Tape tape;
  Var x = tape.constant(Tensor({1, 3, 8, 8}));
  Var w = tape.constant(Tensor({4, 2, 3, 3}));
  Var b = tape.constant(Tensor({4}));
  try {
    conv2d(x, w, b, 1, 1);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("conv2d") != std::string::npos);
    CHECK(msg.find("[4x2x3x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(conv2d(x, tape.constant(Tensor({4, 3, 9, 9})), b, 1, 0), ShapeError);
}

TEST_CASE("conv2d gradients match finite differences") {
  std::mt19937_64 rng(1);
  const int cfg[][3] = {{3, 1, 1}, {3, 2, 1}, {2, 1, 0}, {1, 1, 0}, {3, 1, 0}, {4, 2, 2}};
  double worst = 0.0;
  for (int inst = 0; inst < 24; ++inst) {
    const auto& c = cfg[inst % 6];
    const std::size_t k = static_cast<std::size_t>(c[0]);
    auto r = check_gradients(
        [&](Tape&, const std::vector<Var>& v) { return conv2d(v[0], v[1], v[2], c[1], c[2]); },
        {random_tensor({1, 2, 5, 5}, rng), random_tensor({3, 2, k, k}, rng), random_tensor({3}, rng)},
        100 + inst);
    worst = std::max(worst, r.max_rel_error);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("conv_transpose2d examples and gradients") {
  Tape tape;
  CHECK(conv_transpose2d(tape.constant(Tensor({1, 8, 8, 8})), tape.constant(Tensor({8, 4, 2, 2})), 2, 0).shape() ==
        Shape{1, 4, 16, 16});
  Var y = conv_transpose2d(tape.constant(t({1, 1, 1, 1}, {3})), tape.constant(t({1, 1, 2, 2}, {1, 1, 1, 1})), 1, 0);
  CHECK(values(y) == std::vector<double>{3, 3, 3, 3});

  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int stride = 1 + inst % 2, pad = inst % 3 == 0 ? 1 : 0;
    auto r = check_gradients(
        [&](Tape&, const std::vector<Var>& v) { return conv_transpose2d(v[0], v[1], stride, pad); },
        {random_tensor({1, 2, 3, 3}, rng), random_tensor({2, 3, 3, 3}, rng)}, 200 + inst);
    worst = std::max(worst, r.max_rel_error);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  std::mt19937_64 rng(3);
  const int cfg[][4] = {{3, 1, 1, 6}, {3, 2, 1, 7}, {2, 2, 0, 8}, {4, 2, 1, 8}, {1, 1, 0, 5}};
  for (const auto& c : cfg) {
    const std::size_t k = static_cast<std::size_t>(c[0]), h = static_cast<std::size_t>(c[3]);
    Tape tape;
    const Tensor x = random_tensor({2, 3, h, h}, rng), w = random_tensor({4, 3, k, k}, rng);
    Var cx = conv2d(tape.constant(x), tape.constant(w), tape.constant(Tensor({4})), c[1], c[2]);
    const Tensor y = random_tensor(cx.shape(), rng);
    Var ty = conv_transpose2d(tape.constant(y), tape.constant(w), c[1], c[2]);
    REQUIRE(ty.shape() == x.shape());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += cx.value()[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * ty.value()[i];
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("maxpool2d examples and gradients") {
  Tape tape;
  Var x = tape.leaf(t({1, 1, 2, 2}, {1, 2, 3, 4}), true);
  Var y = maxpool2d(x, 2, 2);
  CHECK(values(y) == std::vector<double>{4});
  backward(sum(y));
  CHECK(std::vector<double>(x.grad().begin(), x.grad().end()) == std::vector<double>{0, 0, 0, 1});

  Tape tie;
  Var xt = tie.leaf(t({1, 1, 2, 2}, {5, 5, 5, 5}), true);
  backward(sum(maxpool2d(xt, 2, 2)));
  CHECK(std::vector<double>(xt.grad().begin(), xt.grad().end()) == std::vector<double>{1, 0, 0, 0});

  CHECK_THROWS_AS(maxpool2d(tape.constant(Tensor({1, 1, 3, 4})), 2, 2), ShapeError);

  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    auto r = check_gradients([](Tape&, const std::vector<Var>& v) { return maxpool2d(v[0], 2, 2); },
                             {separated({1, 1 + static_cast<std::size_t>(inst % 2), 4, 4}, rng)}, 300 + inst);
    worst = std::max(worst, r.max_abs_error);
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("upsample_nearest2x examples and gradients") {
  Tape tape;
  Var x = tape.constant(t({1, 1, 2, 2}, {1, 2, 3, 4}));
  Var y = upsample_nearest2x(x);
  CHECK(values(y) == std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4});
  CHECK(values(maxpool2d(y, 2, 2)) == values(x));

  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    auto r = check_gradients([](Tape&, const std::vector<Var>& v) { return upsample_nearest2x(v[0]); },
                             {random_tensor({1, 2, 3, 3}, rng)}, 400 + inst);
    worst = std::max(worst, r.max_rel_error);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("sigmoid and leaky_relu values and gradients") {
  Tape tape;
  Var z = tape.leaf(t({1}, {0.0}), true);
  Var s = sigmoid(z);
  CHECK(s.value()[0] == 0.5);
  backward(sum(s));
  CHECK(z.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));

  Tape t2;
  Var l = leaky_relu(t2.constant(t({2}, {-1.0, 2.0})), 0.1);
  CHECK(l.value()[0] == doctest::Approx(-0.1));
  CHECK(l.value()[1] == 2.0);

  Tape t3;
  Var ext = sigmoid(t3.constant(t({2}, {-1000.0, 1000.0})));
  CHECK(ext.value().all_finite());
  CHECK(ext.value()[0] >= 0.0);
  CHECK(ext.value()[1] <= 1.0);

  std::mt19937_64 rng(6);
  double worst_s = 0.0, worst_l = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    worst_s = std::max(worst_s, check_gradients([](Tape&, const std::vector<Var>& v) { return sigmoid(v[0]); },
                                                {random_tensor({2, 3, 4}, rng, -4, 4)}, 500 + inst)
                                    .max_rel_error);
    Tensor x = random_tensor({2, 3, 4}, rng, -2, 2);
    for (double& v : x.storage())
      if (std::abs(v) < 0.01) v = 0.5;
    worst_l = std::max(worst_l, check_gradients([](Tape&, const std::vector<Var>& v) { return leaky_relu(v[0], 0.1); },
                                                {x}, 600 + inst)
                                    .max_rel_error);
  }
  CHECK(worst_s < 1e-6);
  CHECK(worst_l < 1e-6);
}

TEST_CASE("linear, flatten, add, scale, sum, mean gradients") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    worst = std::max(worst, check_gradients([](Tape&, const std::vector<Var>& v) { return linear(v[0], v[1], v[2]); },
                                            {random_tensor({2, 3}, rng), random_tensor({3, 4}, rng),
                                             random_tensor({4}, rng)},
                                            700 + inst)
                                .max_rel_error);
    worst = std::max(worst, check_gradients(
                                [](Tape&, const std::vector<Var>& v) {
                                  return mean(scale(add(flatten(v[0]), flatten(v[1])), -1.5));
                                },
                                {random_tensor({2, 2, 3}, rng), random_tensor({2, 2, 3}, rng)}, 800 + inst)
                                .max_rel_error);
  }
  CHECK(worst < 1e-6);
  Tape tape;
  CHECK_THROWS_AS(linear(tape.constant(Tensor({2, 3})), tape.constant(Tensor({4, 2})), tape.constant(Tensor({2}))),
                  ShapeError);
  CHECK_THROWS_AS(add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))), ShapeError);
}

TEST_CASE("bce and mse losses") {
  Tape tape;
  CHECK(bce_loss(tape.constant(t({1}, {0.5})), tape.constant(t({1}, {1.0}))).value()[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  Var p = tape.constant(t({3}, {0.1, 0.4, 0.8}));
  CHECK(mse_loss(p, p).value()[0] == 0.0);
  // Saturated predictions stay finite thanks to the clamp.
  Var sat = bce_loss(tape.constant(t({2}, {0.0, 1.0})), tape.constant(t({2}, {1.0, 0.0})));
  CHECK(std::isfinite(sat.value()[0]));
  CHECK(sat.value()[0] == doctest::Approx(-std::log(kBceEpsilon)).epsilon(1e-9));

  auto bce = [](Tape&, const std::vector<Var>& v) { return bce_loss(v[0], v[1]); };
  auto r = check_gradients(bce, {t({1}, {0.73}), t({1}, {1.0})}, 1);
  CHECK(r.max_rel_error < 1e-6);

  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    worst = std::max(worst, check_gradients(bce, {random_tensor({2, 5}, rng, 0.05, 0.95),
                                                  random_tensor({2, 5}, rng, 0.0, 1.0)},
                                            900 + inst)
                                .max_rel_error);
    worst = std::max(worst, check_gradients([](Tape&, const std::vector<Var>& v) { return mse_loss(v[0], v[1]); },
                                            {random_tensor({2, 5}, rng), random_tensor({2, 5}, rng)}, 950 + inst)
                                .max_rel_error);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("backward semantics") {
  Tape tape;
  Var x = tape.leaf(Tensor({2, 3, 4}, 0.7), true);
  backward(sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);

  Tape t2;
  Var v = t2.leaf(Tensor({2, 2}, 1.0), true);
  CHECK_THROWS_AS(backward(scale(v, 2.0)), ShapeError);

  // A shared subexpression receives the sum of both paths.
  Tape t3;
  Var a = t3.leaf(t({1}, {3.0}), true);
  backward(sum(add(a, a)));
  CHECK(a.grad()[0] == 2.0);
}

TEST_CASE("parameters receive gradients and the tape replays each node once") {
  Tensor w = t({1}, {2.0});
  w.set_requires_grad(true);
  Tape tape;
  Var pw = tape.parameter(w);
  Var y = add(scale(pw, 3.0), pw);
  backward(sum(y));
  REQUIRE(w.has_grad());
  CHECK(w.grad()[0] == 4.0);
  CHECK_THROWS(tape.backward(sum(y)));
}

TEST_CASE("SGD momentum step") {
  Tensor p = t({1}, {1.0});
  p.set_requires_grad(true);
  p.ensure_grad()[0] = 2.0;
  std::vector<Tensor*> params{&p};
  OptimizerConfig cfg;
  cfg.lr = 0.1;
  cfg.momentum = 0.0;
  OptimizerState state(cfg, params);
  step(params, state);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
  zero_grad(params);
  CHECK_FALSE(p.has_grad());
}

TEST_CASE("Adam matches a hand-rolled reference for 5 steps") {
  Tensor p = t({3}, {0.5, -1.0, 2.0});
  p.set_requires_grad(true);
  std::vector<Tensor*> params{&p};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::Adam;
  cfg.lr = 0.01;
  OptimizerState state(cfg, params);

  double ref[3] = {0.5, -1.0, 2.0}, m[3] = {}, v[3] = {};
  for (int it = 1; it <= 5; ++it) {
    auto g = p.ensure_grad();
    for (int i = 0; i < 3; ++i) {
      // Gradient of sum(p^2 * (i + 1)) at the reference point.
      const double gi = 2.0 * ref[i] * (i + 1);
      g[static_cast<std::size_t>(i)] = 2.0 * p[static_cast<std::size_t>(i)] * (i + 1);
      m[i] = 0.9 * m[i] + 0.1 * gi;
      v[i] = 0.999 * v[i] + 0.001 * gi * gi;
      const double mh = m[i] / (1.0 - std::pow(0.9, it)), vh = v[i] / (1.0 - std::pow(0.999, it));
      ref[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
    step(params, state);
    zero_grad(params);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(p[i] - ref[i]) < 1e-12);
  }
}

TEST_CASE("optimizer buffers exist for every parameter") {
  Tensor a({2, 3}), b({4});
  std::vector<Tensor*> params{&a, &b};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::Adam;
  OptimizerState s(cfg, params);
  CHECK(s.steps() == 0);
  step(params, s);  // no gradients: a no-op that must not throw
  CHECK(s.steps() == 1);
  CHECK(optimizer_kind_from_string(to_string(OptimizerKind::Adam)) == OptimizerKind::Adam);
}

TEST_CASE("estimate_memory and budget") {
  const std::vector<Shape> one{{1, 3, 64, 64}};
  CHECK(estimate_memory(one) == 98304);
  CHECK(estimate_memory(std::vector<Shape>{}) == 0);
  CHECK_THROWS_AS(enforce_budget("x", 10, 5), BudgetError);
  CHECK_NOTHROW(enforce_budget("x", 5, 5));

  Tape small(1000);
  try {
    small.leaf(Tensor({1, 3, 64, 64}), false);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.required() > e.budget());
  }
}

TEST_CASE("forward and backward are bit-reproducible") {
  auto run = [] {
    std::mt19937_64 rng(11);
    Tape tape;
    Var x = tape.leaf(random_tensor({2, 3, 8, 8}, rng), true);
    Var w = tape.leaf(random_tensor({4, 3, 3, 3}, rng), true);
    Var b = tape.leaf(random_tensor({4}, rng), true);
    Var y = sigmoid(conv2d(x, w, b, 1, 1));
    Var loss = mean(upsample_nearest2x(maxpool2d(y, 2, 2)));
    backward(loss);
    std::vector<double> out = values(loss);
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    return out;
  };
  CHECK(run() == run());
}

}  // TEST_SUITE
