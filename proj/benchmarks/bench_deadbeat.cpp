#include <benchmark/benchmark.h>

#include "deadbeat/deadbeat.hpp"

using namespace deadbeat;

namespace {

LinearSystem pair_for(int n, int m, bool invertible = true) {
    Rng rng = stream_for(9000, static_cast<std::uint64_t>(n * 10 + m));
    return random_controllable_pair(rng, n, m, invertible);
}

void BM_SubspaceChain(benchmark::State& state) {
    const LinearSystem sys = pair_for(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(subspace_chain(sys));
}
BENCHMARK(BM_SubspaceChain)->DenseRange(2, 8, 2);

void BM_GainPrimal(benchmark::State& state) {
    const LinearSystem sys = pair_for(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(deadbeat_gain(sys));
}
BENCHMARK(BM_GainPrimal)->DenseRange(2, 8, 2);

void BM_GainDual(benchmark::State& state) {
    const LinearSystem sys = pair_for(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(deadbeat_gain_dual(sys));
}
BENCHMARK(BM_GainDual)->DenseRange(2, 8, 2);

void BM_PbhTest(benchmark::State& state) {
    const LinearSystem sys = pair_for(static_cast<int>(state.range(0)), 2, false);
    for (auto _ : state) benchmark::DoNotOptimize(pbh_test(sys));
}
BENCHMARK(BM_PbhTest)->DenseRange(2, 8, 2);

void BM_TrackerStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const LinearSystem sys = pair_for(n, 1);
    const SubspaceChain chain = subspace_chain(sys);
    Rng rng = stream_for(9001, 0);
    const Vector x = gaussian_matrix(rng, n, 1);
    const Vector xhat = gaussian_matrix(rng, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(linear_tracker_step(xhat, x, sys, chain));
}
BENCHMARK(BM_TrackerStep)->DenseRange(2, 8, 2);

void BM_AffineIntersect(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng = stream_for(9002, 0);
    const AffineSet P(gaussian_matrix(rng, n, 1), column_space(gaussian_matrix(rng, n, n / 2)));
    const AffineSet Q(gaussian_matrix(rng, n, 1), column_space(gaussian_matrix(rng, n, n - n / 2)));
    for (auto _ : state) benchmark::DoNotOptimize(affine_intersect(P, Q));
}
BENCHMARK(BM_AffineIntersect)->DenseRange(2, 8, 2);

void BM_NonlinearSteps(benchmark::State& state) {
    const Vector3 xh(1.2, 0.7, 1.9);
    const Vector3 x(0.6, 1.4, 0.8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(homogeneous_tracker_step(xh, x));
        benchmark::DoNotOptimize(positive_tracker_step(xh, x));
    }
}
BENCHMARK(BM_NonlinearSteps);

}  // namespace

BENCHMARK_MAIN();
