#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "tdm/algebra.hpp"
#include "tdm/tensor.hpp"

namespace {

tdm::TypedTensor make_tensor(std::size_t side, double density) {
    tdm::Rng rng(1);
    return gen::random_real_tensor(rng, {side, side, side}, density);
}

void BM_BuilderInsert(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    tdm::Rng rng(2);
    for (auto _ : state) {
        tdm::TensorBuilder b("t", gen::int_dims({64, 64, 64}), tdm::ValueType::Real, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            b.set_at({static_cast<tdm::Index>(1 + rng.next_below(64)),
                      static_cast<tdm::Index>(1 + rng.next_below(64)),
                      static_cast<tdm::Index>(1 + rng.next_below(64))},
                     rng.next_double() + 0.1);
        }
        benchmark::DoNotOptimize(std::move(b).build());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_BuilderInsert)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_Get(benchmark::State& state) {
    const tdm::TypedTensor t = make_tensor(32, 0.2);
    tdm::Rng rng(3);
    for (auto _ : state) {
        const tdm::Coords c{static_cast<tdm::Index>(1 + rng.next_below(32)),
                            static_cast<tdm::Index>(1 + rng.next_below(32)),
                            static_cast<tdm::Index>(1 + rng.next_below(32))};
        benchmark::DoNotOptimize(t.at(c));
    }
}
BENCHMARK(BM_Get);

void BM_Unfold(benchmark::State& state) {
    const tdm::TypedTensor t = make_tensor(static_cast<std::size_t>(state.range(0)), 0.1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::unfold(t, 2));
    }
}
BENCHMARK(BM_Unfold)->Arg(16)->Arg(32)->Arg(64);

void BM_Hadamard(benchmark::State& state) {
    const tdm::TypedTensor x = make_tensor(32, 0.2);
    tdm::Rng rng(4);
    const tdm::TypedTensor y = gen::random_real_tensor(rng, {32, 32, 32}, 0.2, "y");
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::hadamard(x, y));
    }
}
BENCHMARK(BM_Hadamard);

void BM_KhatriRao(benchmark::State& state) {
    tdm::Rng rng(5);
    const tdm::DenseMatrix a = gen::random_matrix(rng, static_cast<std::size_t>(state.range(0)), 16);
    const tdm::DenseMatrix b = gen::random_matrix(rng, static_cast<std::size_t>(state.range(0)), 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::khatri_rao(a, b));
    }
}
BENCHMARK(BM_KhatriRao)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
