#include <benchmark/benchmark.h>

#include "sheetlab/averaging.hpp"
#include "sheetlab/drift.hpp"
#include "sheetlab/field.hpp"
#include "sheetlab/solver.hpp"

namespace {

using namespace sheetlab;

void bm_generate_sheet(benchmark::State& state) {
    const GridSpec g{static_cast<int>(state.range(0)), 1};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        SheetField w = generate_sheet(g, seed++);
        benchmark::DoNotOptimize(w.raw().data());
    }
    state.SetItemsProcessed(state.iterations() * g.n_cells * g.n_cells);
}
BENCHMARK(bm_generate_sheet)->Arg(64)->Arg(256)->Arg(1024);

void bm_solve_explicit(benchmark::State& state) {
    const GridSpec g{static_cast<int>(state.range(0)), 1};
    const SheetField w = generate_sheet(g, 7);
    const Drift b = Drift::componentwise_tanh(1, 1.0);
    const BoundaryTrace bt = BoundaryTrace::zero(g);
    for (auto _ : state) {
        SolutionField x = solve_explicit(b, w, bt);
        benchmark::DoNotOptimize(x.field.raw().data());
    }
    state.SetItemsProcessed(state.iterations() * g.n_cells * g.n_cells);
}
BENCHMARK(bm_solve_explicit)->Arg(64)->Arg(256)->Arg(1024);

void bm_rho_block(benchmark::State& state) {
    const GridSpec g{256, 1};
    const SheetField w = generate_sheet(g, 11);
    const Drift b = Drift::componentwise_sign(1);
    const DyadicBlock blk{static_cast<int>(state.range(0)), 1, 2};
    const std::vector<double> x{0.25};
    const std::vector<double> y{-0.5};
    for (auto _ : state) {
        std::vector<double> r = rho(w, b, blk, x, y);
        benchmark::DoNotOptimize(r.data());
    }
}
BENCHMARK(bm_rho_block)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
