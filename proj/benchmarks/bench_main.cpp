#include <benchmark/benchmark.h>

#include "lambdasim/observables.hpp"
#include "lambdasim/trajectory.hpp"

namespace {

using namespace lambdasim;

void BM_GeneratorApplySparse(benchmark::State& state) {
    const PairSystem system = build_extended_space(LambdaParams::raman(0.5, 0.5, 6.0));
    ComplexVector rho = system.initial.flat();
    ComplexVector out(rho.size());
    for (auto _ : state) {
        system.generator.apply(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_GeneratorApplySparse);

void BM_GeneratorApplyStructured(benchmark::State& state) {
    const PairSystem system = build_extended_space(LambdaParams::raman(0.5, 0.5, 6.0));
    ComplexVector rho = system.initial.flat();
    ComplexVector out(rho.size());
    for (auto _ : state) {
        system.generator.apply_terms(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_GeneratorApplyStructured);

void BM_HermitianEigensystem(benchmark::State& state) {
    const ComplexMatrix h = bare_hamiltonian(LambdaParams::raman(0.5, 0.5, 6.0));
    for (auto _ : state) {
        auto sys = hermitian_eigensystem(h);
        benchmark::DoNotOptimize(sys.values.data());
    }
}
BENCHMARK(BM_HermitianEigensystem);

void BM_RunOncePulseRelax(benchmark::State& state) {
    const LambdaParams params = LambdaParams::pulse_relax(0.5);
    OdeControl control;
    for (auto _ : state) {
        RunResult r = run_once(params, control);
        benchmark::DoNotOptimize(r.v_hom);
    }
}
BENCHMARK(BM_RunOncePulseRelax)->Unit(benchmark::kMillisecond);

void BM_TrajectoryBatch(benchmark::State& state) {
    const LambdaParams params = LambdaParams::pulse_relax(0.5);
    for (auto _ : state) {
        TrajectoryStats stats = sample_trajectories(params, 100, 7);
        benchmark::DoNotOptimize(stats.p_same);
    }
}
BENCHMARK(BM_TrajectoryBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
