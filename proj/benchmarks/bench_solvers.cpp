#include <cmath>
#include <memory>

#include <benchmark/benchmark.h>

#include "janglab/pipeline.hpp"

using namespace janglab;

namespace {

ModelData mass_model(benchmark::State& state) {
    return ModelData::spherical(static_cast<int>(state.range(0)), 1.0, 0.0);
}

}  // namespace

static void BM_Barriers(benchmark::State& state) {
    const ModelData model = mass_model(state);
    for (auto _ : state) benchmark::DoNotOptimize(compute_barriers(model));
}
BENCHMARK(BM_Barriers)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_Jacobian(benchmark::State& state) {
    const ModelData model = ModelData::hyperbolic(5);
    const int N = static_cast<int>(state.range(0));
    auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(0.0, 400.0, N, 400.0, InnerMode::Origin));
    std::vector<double> slice(grid->size());
    for (std::size_t i = 0; i < slice.size(); ++i) slice[i] = std::hypot(1.0, (*grid)[i]) + 1e-3 / (1 + (*grid)[i]);
    const RadialField f(grid, slice);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_jacobian(model, f, 0.0));
    state.SetComplexityN(N);
}
BENCHMARK(BM_Jacobian)->RangeMultiplier(2)->Range(512, 8192)->Complexity(benchmark::oN);

// Continuation on [r0, 400] at the given interval count, barriers precomputed.
static void BM_JangSolve(benchmark::State& state) {
    const ModelData model = ModelData::spherical(5, 1.0, 0.0);
    const BarrierPair pair = compute_barriers(model);
    SolverConfig cfg;
    cfg.R_list = {400.0};
    cfg.intervals = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(continuation_solve(model, cfg, &pair));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JangSolve)->RangeMultiplier(2)->Range(1024, 8192)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_ConformalStage(benchmark::State& state) {
    const ModelData model = mass_model(state);
    const PipelineOptions opts;
    const PipelineResult jang = run_stage(model, Stage::Jang, opts);
    for (auto _ : state) benchmark::DoNotOptimize(conformal_stage(model, jang.jang->final().deviation, opts));
}
BENCHMARK(BM_ConformalStage)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_MassFlux(benchmark::State& state) {
    const ModelData model = mass_model(state);
    for (auto _ : state) benchmark::DoNotOptimize(mass_report(model));
}
BENCHMARK(BM_MassFlux)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_ZonalAlpha(benchmark::State& state) {
    ModelData model = ModelData::spherical(static_cast<int>(state.range(0)), 1.0, 0.0);
    model.m_trace = ZonalFunction::sample([&](double t) { return (model.n - 1) * (1.0 + 0.3 * std::cos(t)); }, 65);
    for (auto _ : state) benchmark::DoNotOptimize(solve_alpha_detailed(model));
}
BENCHMARK(BM_ZonalAlpha)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state) {
    const ModelData model = mass_model(state);
    const PipelineOptions opts;
    for (auto _ : state) benchmark::DoNotOptimize(run_stage(model, Stage::Pipeline, opts));
}
BENCHMARK(BM_Pipeline)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
