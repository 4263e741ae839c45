#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "tdm/analysis.hpp"

namespace {

void BM_Kmeans(benchmark::State& state) {
    tdm::Rng rng(21);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::vector<double>> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = static_cast<double>(i % 4) * 10.0;
        std::vector<double> p(8);
        for (auto& x : p) x = base + rng.next_double();
        points.push_back(std::move(p));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::kmeans(points, 4, 50, 4, 9));
    }
}
BENCHMARK(BM_Kmeans)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Breakouts(benchmark::State& state) {
    tdm::Rng rng(22);
    tdm::TimeSeries s;
    s.window = 3600;
    const auto n = static_cast<std::size_t>(state.range(0));
    s.counts.resize(n);
    s.timestamps.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.counts[i] = (i < n / 2 ? 1.0 : 6.0) + rng.next_double();
        s.timestamps[i] = static_cast<std::int64_t>(i) * 3600;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::detect_breakouts(s, 24, 99, 0.05, 4));
    }
}
BENCHMARK(BM_Breakouts)->Arg(168)->Arg(336)->Unit(benchmark::kMillisecond);

void BM_BotPipeline(benchmark::State& state) {
    gen::PlantedGroups g = gen::planted_groups_tensor(100, 20, 48, 4, 100, 5);
    const tdm::TypedTensor t = tdm::cast_values(g.tensor, tdm::ValueType::Real);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tdm::bot_pipeline(t, 1, 4, 4, 3));
    }
}
BENCHMARK(BM_BotPipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
