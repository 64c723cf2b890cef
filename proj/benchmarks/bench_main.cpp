// Microbenchmarks for the hot paths: pmf evaluation, quantile inversion at
// large rates, maximum-likelihood fitting, count simulation, and smoothing.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "quakenum/dist.hpp"
#include "quakenum/estimate.hpp"
#include "quakenum/ntest.hpp"
#include "quakenum/simulate.hpp"

namespace qn = quakenum;

namespace {

std::vector<std::int64_t> sample_series(std::size_t n, double theta, std::int64_t tau,
                                        std::uint64_t seed) {
    qn::Rng rng(seed, 0);
    std::vector<std::int64_t> counts(n);
    for (auto& c : counts) c = qn::draw_nbd(theta, tau, rng);
    return counts;
}

void BM_NbdPmf(benchmark::State& state) {
    const qn::NbdParams params(0.2, 3.0);
    std::int64_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qn::nbd_pmf(k % 64, params));
        ++k;
    }
}
BENCHMARK(BM_NbdPmf);

void BM_PoissonQuantileLargeRate(benchmark::State& state) {
    const qn::PoissonParams params(1280.6);
    double u = 0.0;
    for (auto _ : state) {
        u += 0.618033988749895;
        if (u >= 1.0) u -= 1.0;
        benchmark::DoNotOptimize(qn::quantile(0.001 + 0.998 * u, params));
    }
}
BENCHMARK(BM_PoissonQuantileLargeRate);

void BM_FitNbdMle(benchmark::State& state) {
    const auto counts = sample_series(static_cast<std::size_t>(state.range(0)), 0.2, 3, 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qn::fit_nbd_mle(counts));
    }
}
BENCHMARK(BM_FitNbdMle)->Arg(100)->Arg(1000);

void BM_LrTest(benchmark::State& state) {
    const auto counts = sample_series(800, 0.2, 3, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qn::lr_test(counts, 0.95));
    }
}
BENCHMARK(BM_LrTest);

void BM_DrawNbd(benchmark::State& state) {
    qn::Rng rng(99, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qn::draw_nbd(0.063, 4, rng));
    }
}
BENCHMARK(BM_DrawNbd);

void BM_SmoothAuto(benchmark::State& state) {
    const auto counts = sample_series(static_cast<std::size_t>(state.range(0)), 0.2, 3, 11);
    const qn::EmpiricalDist dist = qn::empirical_distribution(counts);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qn::smooth_auto(dist));
    }
}
BENCHMARK(BM_SmoothAuto)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
