// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "tmlp/mlp.hpp"
#include "tmlp/problems.hpp"
#include "tmlp/sde.hpp"

namespace {

using namespace tmlp;

const Problem& heat() {
    static const Problem p = heat_oracle(10);
    return p;
}

MlpParams params_for(int n) {
    return {n, static_cast<std::uint64_t>(n), Partition::uniform(64, 1.0)};
}

void BM_MlpSerialReference(benchmark::State& state) {
    const auto params = params_for(static_cast<int>(state.range(0)));
    const std::vector<double> x(10, 0.0);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(reference::estimate(params, 0.0, x, {}, heat(), ++seed).value);
}

void BM_MlpOpenMP(benchmark::State& state) {
    const auto params = params_for(static_cast<int>(state.range(0)));
    const std::vector<double> x(10, 0.0);
    const MlpOptions options{.threads = static_cast<int>(state.range(1))};
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(estimate(params, 0.0, x, {}, heat(), ++seed, options).value);
}

StrongRateConfig rate_config(int threads) {
    StrongRateConfig cfg;
    for (int k = 2; k <= 8; ++k) cfg.steps.push_back(std::uint64_t{1} << k);
    cfg.paths = 2000;
    cfg.threads = threads;
    return cfg;
}

void BM_StrongRateSerialReference(benchmark::State& state) {
    const Problem p = ou_oracle(5);
    const auto cfg = rate_config(1);
    for (auto _ : state) benchmark::DoNotOptimize(strong_rate_experiment_serial(p, cfg).slope);
}

void BM_StrongRateOpenMP(benchmark::State& state) {
    const Problem p = ou_oracle(5);
    const auto cfg = rate_config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(strong_rate_experiment(p, cfg).slope);
}

}  // namespace

BENCHMARK(BM_MlpSerialReference)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MlpOpenMP)->ArgsProduct({{3, 4}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_StrongRateSerialReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StrongRateOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
