#include <benchmark/benchmark.h>

#include "galign/frechet.hpp"
#include "galign/random.hpp"

using namespace galign;

namespace {

WeightedPoseSample make_sample(std::size_t n, double kappa) {
    RandomStream rng(42);
    std::vector<Element> elems;
    elems.reserve(n);
    for (std::size_t i = 0; i < n; ++i) elems.push_back(so2_element(rng.von_mises(1.0, kappa)));
    return WeightedPoseSample(std::move(elems));
}

}  // namespace

static void BM_FrechetMeanKarcher(benchmark::State& state) {
    const auto sample = make_sample(static_cast<std::size_t>(state.range(0)), 4.0);
    for (auto _ : state) benchmark::DoNotOptimize(frechet_mean(sample));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FrechetMeanKarcher)->Range(64, 16384)->Complexity(benchmark::oNLogN);

static void BM_FrechetMeanOracle(benchmark::State& state) {
    const auto sample = make_sample(1024, 4.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(frechet_mean_oracle(sample, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_FrechetMeanOracle)->Range(64, 3600);

static void BM_MixtureDecomposition(benchmark::State& state) {
    const auto kept = make_sample(static_cast<std::size_t>(state.range(0)), 4.0);
    const auto updated = make_sample(static_cast<std::size_t>(state.range(0)) / 4, 40.0);
    for (auto _ : state) benchmark::DoNotOptimize(mixture_decomposition(kept, updated, 0.2));
}
BENCHMARK(BM_MixtureDecomposition)->Range(256, 8192);

BENCHMARK_MAIN();
