// Serial reference vs OpenMP for the two hot kernels: level solves during
// spectrum assembly and the exact phase sum over time points.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ringdec/decoherence.hpp"
#include "ringdec/spectrum.hpp"

using namespace ringdec;

namespace {

RingParams ring(int N) {
    return {N, 4.0 * constants::m_p, 1e-13, 1e-6 * N / 80.0, 1e-5};
}

void BM_Assemble(benchmark::State& state, bool parallel) {
    const RingParams p = ring(static_cast<int>(state.range(0)));
    long solves = 0;
    for (auto _ : state) {
        const auto s = spectrum::assemble_thin_spectrum(p, p.N, 1, {}, {true, parallel});
        solves = s.solves();
        benchmark::DoNotOptimize(s.E(0, 0));
    }
    state.counters["solves"] = static_cast<double>(solves);
    state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
}

void BM_ExactTrace(benchmark::State& state, bool parallel) {
    const RingParams p = ring(static_cast<int>(state.range(0)));
    const auto base = spectrum::assemble_thin_spectrum(p, p.N, 1);
    const auto spec = base.widened(static_cast<int>(decoherence::required_n_trunc(p)));
    const auto ens = decoherence::build_ensemble(spec);
    std::vector<double> t(static_cast<std::size_t>(state.range(1)));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = 1e-3 * static_cast<double>(i) / static_cast<double>(t.size());
    }
    for (auto _ : state) {
        const auto tr = decoherence::decoherence_exact(ens, spec, t, {parallel});
        benchmark::DoNotOptimize(tr.F.back());
    }
    state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
    state.SetItemsProcessed(state.iterations() * static_cast<long>(t.size()));
}

} // namespace

BENCHMARK_CAPTURE(BM_Assemble, serial, false)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Assemble, openmp, true)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ExactTrace, serial, false)->Args({80, 20000})->Args({320, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ExactTrace, openmp, true)->Args({80, 20000})->Args({320, 20000})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
