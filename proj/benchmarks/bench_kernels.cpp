#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "shadowkit/datakit/synth.hpp"
#include "shadowkit/models/specs.hpp"
#include "shadowkit/tensorcore/kernels.hpp"
#include "shadowkit/tensorcore/ops.hpp"

using namespace shadowkit;
using namespace shadowkit::tensorcore;

namespace {

Tensor random_tensor(const Shape& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(s);
  for (double& v : t.storage()) v = u(rng);
  return t;
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    kernels::gemm_acc(n, n, n, a.data().data(), n, b.data().data(), n, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["flops"] =
      benchmark::Counter(2.0 * static_cast<double>(n * n * n), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Gemm)->Arg(64)->Arg(256)->Arg(512);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({4, c, 32, 32}, 3), w = random_tensor({2 * c, c, 3, 3}, 4);
  const Tensor b = random_tensor({2 * c}, 5);
  for (auto _ : state) {
    Tape tape;
    Var xv = tape.leaf(x, true);
    Var loss = sum(conv2d(xv, tape.leaf(w, true), tape.leaf(b, true), 1, 1));
    backward(loss);
    benchmark::DoNotOptimize(xv.grad().data());
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(16)->Arg(32);

void BM_SegmentationStep(benchmark::State& state) {
  datakit::SceneConfig cfg;
  std::vector<datakit::Sample> scenes;
  for (std::size_t i = 0; i < 4; ++i) scenes.push_back(datakit::synth_scene(cfg, i));
  std::vector<const datakit::Sample*> batch;
  for (const auto& s : scenes) batch.push_back(&s);
  const Tensor images = models::images_to_tensor(batch), masks = models::masks_to_tensor(batch);

  models::SegmentationModel model;
  model.net.init_he(7);
  for (auto _ : state) {
    Tape tape;
    Var pred = model.net.forward(tape, tape.constant(images));
    Var loss = bce_loss(pred, tape.constant(masks));
    backward(loss);
    for (Tensor* p : model.net.parameter_ptrs()) p->clear_grad();
  }
}
BENCHMARK(BM_SegmentationStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
