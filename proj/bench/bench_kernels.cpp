#include <benchmark/benchmark.h>

#include "charfront/oracle.hpp"
#include "charfront/pipeline.hpp"
#include "charfront/shockfit.hpp"

using namespace charfront;

namespace {

const Problem& psystem() {
    static const Problem p = prepare_problem(builtin("psystem"), default_profile("psystem"));
    return p;
}

void BM_SolveInner(benchmark::State& state) {
    const Problem& p = psystem();
    ShockControls c;
    c.time_levels = 12;
    c.parallel = state.range(0) != 0;
    const Vec t = shock_time_grid(c);
    const ShockCurve curve(t, Vec(t.size(), 0.0), Vec(t.size(), 0.0));
    for (auto _ : state) {
        TwoSidedSolution sol = solve_inner(p.normalized.data.model, p.normalized.data.chart, p.preshock, curve, c);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_SolveInner)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_FvRun(benchmark::State& state) {
    const Problem& p = psystem();
    FvOptions o;
    o.parallel = state.range(0) != 0;
    const SimpleWaveData& d = p.normalized.data;
    const auto init = [&](double x) { return d.chart.inverse(d.wbar(p.preshock.sampler(x))); };
    for (auto _ : state) {
        FvState s = fv_run(d.model, init, -0.1, 0.1, 0, 0.01, 1e-4, 0.45, {}, o);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_FvRun)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
