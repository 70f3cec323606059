// Serial reference versus OpenMP kernels.
#include <benchmark/benchmark.h>

#include "hks/riemann.hpp"
#include "hks/scenarios.hpp"
#include "hks/solver.hpp"

namespace {

hks::SimState plateau(int dim, int n) {
    hks::ScenarioConfig c = hks::default_config(dim == 1 ? hks::ScenarioKind::remark11 : hks::ScenarioKind::thm13_case2);
    c.rho_bar = 2.0;
    c.grid.cells_per_axis = n;
    return hks::build_data(c);
}

void residual(benchmark::State& st, hks::Exec exec, int dim) {
    const hks::SimState s = plateau(dim, static_cast<int>(st.range(0)));
    hks::SolverConfig cfg;
    cfg.reconstruction = hks::Reconstruction::minmod;
    hks::Residual out;
    for (auto _ : st) {
        hks::compute_residual(s, cfg, 0.0, exec, out);
        benchmark::DoNotOptimize(out.rho.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(s.rho.size()));
}

void invariants(benchmark::State& st, hks::Exec exec) {
    const hks::SimState s = plateau(1, static_cast<int>(st.range(0)));
    for (auto _ : st) {
        const hks::InvariantFields f = hks::invariant_fields(s, nullptr, exec);
        benchmark::DoNotOptimize(f.P.values.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(s.rho.size()));
}

}  // namespace

BENCHMARK_CAPTURE(residual, serial_1d, hks::Exec::serial, 1)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK_CAPTURE(residual, parallel_1d, hks::Exec::parallel, 1)->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK_CAPTURE(residual, serial_2d, hks::Exec::serial, 2)->Arg(256)->Arg(640);
BENCHMARK_CAPTURE(residual, parallel_2d, hks::Exec::parallel, 2)->Arg(256)->Arg(640);
BENCHMARK_CAPTURE(invariants, serial, hks::Exec::serial)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(invariants, parallel, hks::Exec::parallel)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
