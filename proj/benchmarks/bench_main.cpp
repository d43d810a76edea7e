#include <benchmark/benchmark.h>

#include "quadgeo/correspondence.hpp"
#include "quadgeo/density.hpp"
#include "quadgeo/stats.hpp"

using namespace quadgeo;

static void BM_EnumerateRoots(benchmark::State& state) {
    auto d = validate_discriminant(2);
    const i64 M = state.range(0);
    for (auto _ : state) {
        std::size_t n = 0;
        FactorTable ft(M);
        enumerate_roots(d, 1, M, {}, ft, [&](const Root&) { ++n; });
        benchmark::DoNotOptimize(n);
    }
    state.SetItemsProcessed(state.iterations() * M);
}
BENCHMARK(BM_EnumerateRoots)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

static void BM_RootToAddress(benchmark::State& state) {
    auto d = validate_discriminant(state.range(0));
    ClassGroupData cg = narrow_class_reps(d);
    auto roots = enumerate_roots(d, 20000);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(root_to_address(roots[i], cg));
        if (++i == roots.size()) i = 0;
    }
}
BENCHMARK(BM_RootToAddress)->Arg(2)->Arg(10)->Arg(94);

static void BM_PairCorrelation(benchmark::State& state) {
    i64 M = 0;
    auto d = validate_discriminant(2);
    PointSequence s = normalize(first_n_roots(d, state.range(0), {}, M), 2, M);
    for (auto _ : state) benchmark::DoNotOptimize(pair_correlation(s, {-4, 4, 0.1}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PairCorrelation)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_DoubleCosets(benchmark::State& state) {
    ClassGroupData cg = narrow_class_reps(validate_discriminant(3));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_double_cosets(cg, 1, 0, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_DoubleCosets)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_DensityPoint(benchmark::State& state) {
    ClassGroupData cg = narrow_class_reps(validate_discriminant(2));
    DensityProfile p = build_profile(cg, 1, 0, 1000);
    double v = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(w_density(p, v));
        v += 0.01;
        if (v > 4) v = 0.05;
    }
}
BENCHMARK(BM_DensityPoint);

static void BM_HClosed(benchmark::State& state) {
    double q = -4.9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(H_closed(1, q, 2.3) + H_closed(-1, q, -2.3));
        q += 0.37;
        if (q > 40) q = -4.9;
    }
}
BENCHMARK(BM_HClosed);

BENCHMARK_MAIN();
