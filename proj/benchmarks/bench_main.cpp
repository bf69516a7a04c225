#include <benchmark/benchmark.h>

#include <random>

#include "convcaps/app/synthetic.hpp"
#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/network.hpp"
#include "convcaps/caps/params.hpp"
#include "convcaps/caps/routing.hpp"
#include "convcaps/hsi/patch.hpp"
#include "convcaps/metrics/margin_loss.hpp"
#include "convcaps/numerics/ops.hpp"
#include "convcaps/training/trainer.hpp"

using namespace convcaps;
using numerics::Tensor;

namespace {

Tensor random_tensor(numerics::Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : t.values()) x = u(rng);
  return t;
}

// Indian Pines sized network: 220 bands, 16 classes, 7x7 patch.
struct IndianPinesModel {
  caps::Architecture arch = caps::published_architecture(220, 16);
  caps::ModelParams params = caps::ModelParams::glorot_uniform(arch, 0);
  Tensor patch = random_tensor({arch.patch_size, arch.patch_size, arch.channels}, 1);
};

void BM_ModelForward(benchmark::State& state) {
  const IndianPinesModel m;
  for (auto _ : state) benchmark::DoNotOptimize(caps::model_forward(m.patch, m.arch, m.params, 3));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMicrosecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  const IndianPinesModel m;
  auto grad = caps::ModelParams::zeros(m.arch);
  const metrics::MarginConfig margin;
  for (auto _ : state) {
    caps::ForwardCache cache;
    const auto act = caps::model_forward(m.patch, m.arch, m.params, 3, &cache);
    Tensor act_grad;
    benchmark::DoNotOptimize(metrics::margin_loss(act, 4, margin, &act_grad));
    caps::model_backward(m.patch, m.arch, m.params, cache, act_grad, grad);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_Routing(benchmark::State& state) {
  const auto iters = static_cast<std::size_t>(state.range(0));
  const auto arch = caps::published_architecture(220, 16);
  const auto pred = random_tensor({arch.window_arrays, arch.window_positions(), arch.classes, arch.class_dim}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(caps::route(pred, iters));
}
BENCHMARK(BM_Routing)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_Conv1d(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto signal = random_tensor({length, 16}, 3);
  const auto kernels = random_tensor({16, 16, 9}, 4);
  const Tensor bias({16});
  for (auto _ : state) benchmark::DoNotOptimize(numerics::conv1d_valid(signal, kernels, bias, 2));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_Conv1d)->Arg(103)->Arg(220)->Unit(benchmark::kMicrosecond);

void BM_TrainEpochToy(benchmark::State& state) {
  const auto cube = app::make_toy_cube({});
  const auto arch = app::toy_architecture(32, 3);
  const auto split = hsi::stratified_split(cube, {}, 0);
  training::TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.threads = static_cast<std::size_t>(state.range(0));
  const training::PatchSource train{&cube, arch.patch_size, split.train};
  const training::PatchSource val{&cube, arch.patch_size, split.validation};
  const auto init = caps::ModelParams::glorot_uniform(arch, 0);
  for (auto _ : state) benchmark::DoNotOptimize(training::train(arch, init, train, val, cfg));
}
BENCHMARK(BM_TrainEpochToy)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
