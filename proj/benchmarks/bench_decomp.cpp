#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "tdm/decomp.hpp"

namespace {

void BM_CpAlsSweeps(benchmark::State& state) {
    tdm::Rng rng(11);
    gen::PlantedCp planted = gen::planted_cp_tensor(rng, {30, 30, 30}, 5);
    const auto rank = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::cp_als(planted.tensor, rank, 10, 0.0, 7));
    }
}
BENCHMARK(BM_CpAlsSweeps)->Arg(2)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Hosvd(benchmark::State& state) {
    tdm::Rng rng(12);
    const auto side = static_cast<std::size_t>(state.range(0));
    const tdm::TypedTensor t = gen::random_real_tensor(rng, {side, side, side}, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::hosvd(t, {side / 2, side / 2, side / 2}));
    }
}
BENCHMARK(BM_Hosvd)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ReconstructCp(benchmark::State& state) {
    tdm::Rng rng(13);
    gen::PlantedCp planted = gen::planted_cp_tensor(rng, {24, 24, 24}, 4);
    const tdm::CpResult r = tdm::cp_als(planted.tensor, 4, 30, 1e-9, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::reconstruct_cp(r, planted.tensor.dims()));
    }
}
BENCHMARK(BM_ReconstructCp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
