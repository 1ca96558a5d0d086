// Timing of the lifted pipeline against the classical oracle on the reference
// scenario (12.5 krpm, 0.5 mm, half immersion). `m` is the step count per
// tooth period.
#include "chatterlift/lifted_system.hpp"
#include "chatterlift/reference_oracles.hpp"
#include "chatterlift/scenario.hpp"
#include "chatterlift/stability.hpp"
#include "chatterlift/surface_error.hpp"

#include <benchmark/benchmark.h>

using namespace chatterlift;

namespace {

const MillingScenario& scenario() {
    static const MillingScenario s = reference_scenario();
    return s;
}

Hold hold_of(const benchmark::State& state) { return state.range(1) ? Hold::Zoh : Hold::Imp; }

void BM_BuildLiftedProblem(benchmark::State& state) {
    const Discretization disc{static_cast<int>(state.range(0)), hold_of(state)};
    for (auto _ : state) benchmark::DoNotOptimize(build_lifted_problem(scenario(), 12500.0, disc));
}

void BM_AssembleClosedLoop(benchmark::State& state) {
    const LiftedProblem p = build_lifted_problem(scenario(), 12500.0,
                                                 Discretization{static_cast<int>(state.range(0)), hold_of(state)});
    for (auto _ : state) benchmark::DoNotOptimize(assemble_closed_loop(p.structure, p.force, 0.5e-3));
}

void BM_SpectralRadiusLifted(benchmark::State& state) {
    const LiftedProblem p = build_lifted_problem(scenario(), 12500.0,
                                                 Discretization{static_cast<int>(state.range(0)), hold_of(state)});
    const ClosedLoopSystem c = assemble_closed_loop(p.structure, p.force, 0.5e-3);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(c.Phi));
}

// One SLD cell end to end.
void BM_AssessLifted(benchmark::State& state) {
    const Discretization disc{static_cast<int>(state.range(0)), hold_of(state)};
    for (auto _ : state) benchmark::DoNotOptimize(assess_stability(scenario(), 12500.0, 0.5e-3, disc));
}

void BM_AssessClassical(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(classical_sdm(scenario(), m).Phi_a));
}

// A 10-speed row of the diagram, the unit the speedup comparison is made on.
void BM_SldRowLifted(benchmark::State& state) {
    const auto speeds = linspace(3000.0, 23000.0, 10);
    const std::vector<double> depths{0.5e-3};
    const Discretization disc{static_cast<int>(state.range(0)), Hold::Imp};
    for (auto _ : state) benchmark::DoNotOptimize(sld_grid(scenario(), speeds, depths, disc));
}

void BM_SteadyStateVibration(benchmark::State& state) {
    const LiftedProblem p = build_lifted_problem(scenario(), 12500.0,
                                                 Discretization{static_cast<int>(state.range(0)), Hold::Imp});
    for (auto _ : state) benchmark::DoNotOptimize(steady_state_vibration(p.structure, p.force, 0.5e-3));
}

void steps_and_hold(benchmark::internal::Benchmark* b) {
    for (int m : {20, 40, 100, 200})
        for (int h : {0, 1}) b->Args({m, h});
}

}  // namespace

BENCHMARK(BM_BuildLiftedProblem)->Apply(steps_and_hold)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AssembleClosedLoop)->Apply(steps_and_hold)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SpectralRadiusLifted)->Apply(steps_and_hold)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssessLifted)->Apply(steps_and_hold)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssessClassical)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SldRowLifted)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SteadyStateVibration)->Arg(40)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
