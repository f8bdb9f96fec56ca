// Serial reference kernels vs their OpenMP counterparts, plus one training
// batch of the full model.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "pnmn/kernels.hpp"
#include "pnmn/model.hpp"

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <auto Kernel>
void BM_Gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_values(m * k, 1);
  const auto b = random_values(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Kernel(a, b, c, m, k, n);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * k * n));
  state.counters["threads"] = omp_get_max_threads();
}

void gemm_args(benchmark::internal::Benchmark* b) {
  b->Args({32, 104, 320})->Args({256, 256, 256})->Args({1024, 512, 512});
}

BENCHMARK(BM_Gemm<pnmn::kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Apply(gemm_args);
BENCHMARK(BM_Gemm<pnmn::kernels::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Apply(gemm_args);
BENCHMARK(BM_Gemm<pnmn::kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Apply(gemm_args);
BENCHMARK(BM_Gemm<pnmn::kernels::parallel::gemm_tn>)->Name("gemm_tn/parallel")->Apply(gemm_args);
BENCHMARK(BM_Gemm<pnmn::kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Apply(gemm_args);
BENCHMARK(BM_Gemm<pnmn::kernels::parallel::gemm_nt>)->Name("gemm_nt/parallel")->Apply(gemm_args);

void BM_TrainBatch(benchmark::State& state) {
  pnmn::ModelConfig config;
  config.kind = static_cast<pnmn::ModelKind>(state.range(0));
  const pnmn::Model model = pnmn::Model::create(config, 7);
  const std::size_t batch = 32;
  std::vector<pnmn::Array> inputs;
  for (std::size_t i = 0; i < batch; ++i) {
    inputs.emplace_back(pnmn::Shape{config.steps, config.input_dim}, random_values(config.steps * config.input_dim, i));
  }
  std::vector<const pnmn::Array*> ptrs;
  for (const auto& a : inputs) ptrs.push_back(&a);
  std::vector<int> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>(i % config.classes);
  for (auto _ : state) {
    pnmn::ad::Graph g;
    const auto bound = pnmn::bind_model(g, model);
    auto out = pnmn::run_batch(g, model, bound, ptrs, model.reset_state());
    const auto loss = g.softmax_cross_entropy(out.logits, labels);
    g.backward(loss);
    benchmark::DoNotOptimize(g.value(loss)[0]);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_TrainBatch)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
