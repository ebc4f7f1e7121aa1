#include <benchmark/benchmark.h>

#include <random>

#include "lzsc/conv.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/parameters.hpp"
#include "lzsc/synthetic.hpp"
#include "lzsc/training.hpp"

using namespace lzsc;

namespace {

Tensor noise(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(h, w, c);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// args: image size, in channels, out channels, kernel size
void BM_Conv2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cin = static_cast<std::size_t>(state.range(1)), cout = static_cast<std::size_t>(state.range(2));
  const auto k = static_cast<std::size_t>(state.range(3));
  const Tensor x = noise(n, n, cin, 1);
  ConvKernel w({cout, cin, k, k});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (double& v : w.weights()) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_same(x, w));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * cin * cout * k * k));
}
BENCHMARK(BM_Conv2d)->Args({64, 1, 8, 5})->Args({64, 8, 1, 5})->Args({128, 1, 64, 9})->Args({128, 64, 1, 9});

void BM_LzscBlock(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const LzscBlockParams p = LzscBlockParams::random(1, 8, 5, 4, rng);
  const Tensor x = noise(n, n, 1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(lzsc_forward(x, p));
}
BENCHMARK(BM_LzscBlock)->Arg(32)->Arg(64)->Arg(128);

void BM_FNetForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  const FNetParams p = FNetParams::random(NetworkScale::desk(), rng);
  const auto pair = synthetic_pairs(1, n, n, 6)[0];
  for (auto _ : state) benchmark::DoNotOptimize(fnet_forward(pair.m1, pair.m2, p));
}
BENCHMARK(BM_FNetForward)->Arg(64)->Arg(128)->Arg(256);

void BM_Stage1Step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  const FNetParams f = FNetParams::random(NetworkScale::desk(), rng);
  const IFNetParams g = IFNetParams::random(NetworkScale::desk(), rng);
  const auto pair = synthetic_pairs(1, n, n, 8)[0];
  for (auto _ : state) {
    FNetParams gf = zeros_like(f);
    IFNetParams gg = zeros_like(g);
    benchmark::DoNotOptimize(stage1_loss_and_grad(pair, f, g, &gf, &gg).total);
  }
}
BENCHMARK(BM_Stage1Step)->Arg(32)->Arg(64);

void BM_Stage2Step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(9);
  const FNetParams f = FNetParams::random(NetworkScale::desk(), rng);
  const auto pair = synthetic_pairs(1, n, n, 10)[0];
  for (auto _ : state) {
    FNetParams gf = zeros_like(f);
    benchmark::DoNotOptimize(stage2_loss_and_grad(pair, f, {}, &gf).total);
  }
}
BENCHMARK(BM_Stage2Step)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
