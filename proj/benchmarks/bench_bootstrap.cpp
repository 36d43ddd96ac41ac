#include <benchmark/benchmark.h>

#include "galign/bootstrap.hpp"

using namespace galign;

namespace {

Dataset bench_dataset(int per_class) {
    DatasetSpec spec(PoseDistribution::parse(Manifold::so2(), "vonmises:0:2"));
    spec.num_classes = 4;
    spec.per_class = per_class;
    spec.shape_seed = 7;
    return generate_dataset(spec);
}

}  // namespace

static void BM_BootstrapStepNoisy(benchmark::State& state) {
    Dataset d = bench_dataset(static_cast<int>(state.range(0)) / 4);
    Canonicalizer canon = Canonicalizer::noisy(d.manifold, 100.0, identity(d.manifold), 11);
    BootstrapConfig cfg;
    cfg.alpha = 0.1;
    cfg.selection = Selection::Random;
    const GroupGrid grid = make_grid(d.manifold, 64);
    for (auto _ : state) {
        canon.epoch = d.step_t;
        benchmark::DoNotOptimize(bootstrap_step(d, cfg, canon, grid));
    }
}
BENCHMARK(BM_BootstrapStepNoisy)->Range(256, 8192);

static void BM_TemplateCanonicalize(benchmark::State& state) {
    Dataset d = bench_dataset(8);
    Canonicalizer tmpl = Canonicalizer::template_scorer(d.manifold);
    tmpl.shape_template = d.class_shapes[0];
    const GroupGrid grid = make_grid(d.manifold, static_cast<int>(state.range(0)));
    for (auto _ : state)
        for (const auto& x : d.specimens)
            benchmark::DoNotOptimize(canonicalize(tmpl, x, grid, true));
}
BENCHMARK(BM_TemplateCanonicalize)->Range(16, 256);

BENCHMARK_MAIN();
