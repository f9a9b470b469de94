#include "evostab/builtins.hpp"
#include "evostab/calculus.hpp"
#include "evostab/evolution.hpp"
#include "evostab/extension.hpp"
#include "evostab/stability.hpp"
#include "evostab/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace evostab;

namespace {

void BM_EvolveExample(benchmark::State& state) {
    const double T = static_cast<double>(state.range(0));
    const auto A = assemble_A(builtins::example39(NormKind::euclidean, builtins::sine(), T));
    StepStats stats;
    for (auto _ : state) benchmark::DoNotOptimize(evolve(A, 0.0, T, {}, &stats));
    state.counters["steps"] = static_cast<double>(stats.accepted) / state.iterations();
}
BENCHMARK(BM_EvolveExample)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EvolutionOperatorQuery(benchmark::State& state) {
    const auto A = assemble_A(builtins::example39(NormKind::euclidean, builtins::sine(), 100.0));
    const EvolutionOperator X(A, {0.0, 100.0}, {}, 400);
    double s = 0.0;
    for (auto _ : state) {
        s = std::fmod(s + 7.31, 90.0);
        benchmark::DoNotOptimize(X(s + 9.5, s));
    }
}
BENCHMARK(BM_EvolutionOperatorQuery)->Unit(benchmark::kMicrosecond);

void BM_Quadrature(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            integrate([](double t) { return std::abs(std::sin(t * t)); }, {0.0, 20.0}));
    }
}
BENCHMARK(BM_Quadrature)->Unit(benchmark::kMicrosecond);

void BM_Certify(benchmark::State& state) {
    const auto G = builtins::example39_field();
    for (auto _ : state) {
        benchmark::DoNotOptimize(certify(G, {-1.0, 1.0}, {0.0, 100.0}, NormKind::euclidean));
    }
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMillisecond);

void BM_SineCurveTransport(benchmark::State& state) {
    const double b = -std::pow(10.0, -static_cast<double>(state.range(0)));
    const auto w = builtins::smooth_connection(11, 0.02, VectorSpace(2, NormKind::euclidean),
                                               {{-1.0, 0.0}, {-1.0, 1.0}});
    const auto curve = sine_curve(-1.0, b);
    for (auto _ : state) benchmark::DoNotOptimize(parallel_transport(w, curve));
}
BENCHMARK(BM_SineCurveTransport)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_GraphApprox(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(polynomial_graph_approx(
            [](double t) { return std::sin(1.0 / (t + 1.1)); }, 0.0, 1.0, 0.5, 0.01));
    }
}
BENCHMARK(BM_GraphApprox)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
