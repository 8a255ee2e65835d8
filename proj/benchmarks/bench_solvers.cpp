#include "robirl/environments.hpp"
#include "robirl/irl.hpp"
#include "robirl/solvers.hpp"

#include <benchmark/benchmark.h>

using namespace robirl;

static void BM_SoftValueIteration(benchmark::State& state) {
    auto m = make_noisy(make_preset("grid-1", static_cast<int>(state.range(0))), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(soft_value_iteration(m).v_soft);
    state.SetLabel(std::to_string(m.n_states()) + " states");
}
BENCHMARK(BM_SoftValueIteration)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_TwoPlayerSoftVI(benchmark::State& state) {
    auto m = make_noisy(make_preset("grid-1", static_cast<int>(state.range(0))), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(two_player_soft_vi(m, 0.9).v);
}
BENCHMARK(BM_TwoPlayerSoftVI)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_StateOccupancy(benchmark::State& state) {
    auto m = make_noisy(make_preset("grid-1", static_cast<int>(state.range(0))), 0.1);
    auto pi = soft_value_iteration(m).policy;
    for (auto _ : state) benchmark::DoNotOptimize(state_occupancy(m, pi).rho);
}
BENCHMARK(BM_StateOccupancy)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_MceGradientStep(benchmark::State& state) {
    auto expert = make_noisy(make_preset("grid-1", static_cast<int>(state.range(0))), 0.2);
    auto learner = make_preset("grid-1", static_cast<int>(state.range(0)));
    auto target = state_occupancy(expert, value_iteration(expert).policy);
    const Matrix& phi = learner.reward()->features;
    Vector theta = Vector::Zero(phi.cols());
    for (auto _ : state) benchmark::DoNotOptimize(mce_gradient(learner, target, phi, theta).gradient);
}
BENCHMARK(BM_MceGradientStep)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
