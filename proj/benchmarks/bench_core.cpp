#include <benchmark/benchmark.h>

#include <random>

#include "entrogd/entrogd.hpp"

using namespace entrogd;

namespace {

// Integer table whose rows fall in a few groups with noisy low bits.
Table grouped(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> groups(8 * d);
  for (auto& g : groups) g = static_cast<std::int64_t>(rng() >> 12) & ~std::int64_t{0xFF};
  std::vector<Column> cols;
  for (std::size_t c = 0; c < d; ++c) cols.push_back(Column::integers("x" + std::to_string(c), {}));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t g = rng() % 8;
    for (std::size_t c = 0; c < d; ++c) cols[c].ints.push_back(groups[g * d + c] | static_cast<std::int64_t>(rng() & 0xFF));
  }
  return Table(std::move(cols));
}

void BM_AddBit(benchmark::State& state) {
  const QuantizedMatrix q = quantize_dataset(grouped(static_cast<std::size_t>(state.range(0)), 4, 1));
  for (auto _ : state) {
    BaseTree tree(q);
    for (BitPos b = 0; b < 16; ++b) tree.add_bit(b);
    benchmark::DoNotOptimize(tree.leaf_count());
  }
  state.SetItemsProcessed(state.iterations() * 16 * state.range(0));
}
BENCHMARK(BM_AddBit)->Arg(10000)->Arg(100000);

void BM_BitStats(benchmark::State& state) {
  const QuantizedMatrix q = quantize_dataset(grouped(static_cast<std::size_t>(state.range(0)), 8, 2));
  for (auto _ : state) benchmark::DoNotOptimize(bit_stats(q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BitStats)->Arg(10000)->Arg(100000);

void BM_Compress(benchmark::State& state) {
  const Table t = grouped(20000, static_cast<std::size_t>(state.range(0)), 3);
  CompressConfig cfg;
  cfg.strategy = static_cast<Strategy>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(compress(t, cfg));
}
BENCHMARK(BM_Compress)->ArgsProduct({{4, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_WeightedKMeans(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> pts(n * 5), w(n);
  for (auto& x : pts) x = g(rng);
  for (auto& x : w) x = 1.0 + static_cast<double>(rng() % 50);
  KMeansOptions o;
  o.k = 5;
  o.inits = 1;
  for (auto _ : state) benchmark::DoNotOptimize(weighted_kmeans(pts, 5, w, o));
}
BENCHMARK(BM_WeightedKMeans)->Arg(1024)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
