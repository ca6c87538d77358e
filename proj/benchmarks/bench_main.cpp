#include <map>

#include <benchmark/benchmark.h>

#include "dsub/exchange.hpp"
#include "dsub/linalg.hpp"
#include "dsub/seeding.hpp"
#include "dsub/sim.hpp"

using namespace dsub;

namespace {

const DataMatrix& dataset(Index n, Index p) {
  static thread_local std::map<std::pair<Index, Index>, DataMatrix> cache;
  auto it = cache.find({n, p});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, p), sim::gen_mvn_equicorr(n, p, 0.5, 1)).first;
  return it->second;
}

void BM_SwapDelta(benchmark::State& state) {
  const Index p = state.range(0);
  const DataMatrix& d = dataset(10000, p);
  const Selection s = seeding::uniform_seed(d, 10 * (p + 1), 3);
  const linalg::MomentState q = linalg::build_moment(d, s);
  const auto out = linalg::AugmentedRow::of_row(d, s.indices[0]);
  Index row = 0;
  for (auto _ : state) {
    const auto in = linalg::AugmentedRow::of_row(d, row);
    benchmark::DoNotOptimize(q.swap_delta_logdet(out, in));
    row = (row + 1) % d.n();
  }
}
BENCHMARK(BM_SwapDelta)->Arg(2)->Arg(10)->Arg(30);

void BM_RankOneUpdate(benchmark::State& state) {
  const Index p = state.range(0);
  const DataMatrix& d = dataset(10000, p);
  linalg::MomentState q = linalg::build_moment(d, seeding::uniform_seed(d, 10 * (p + 1), 3));
  const auto z = linalg::AugmentedRow::of_row(d, 9999);
  for (auto _ : state) {
    q.rank_one_update(z, linalg::Direction::add);
    q.rank_one_update(z, linalg::Direction::remove);
  }
}
BENCHMARK(BM_RankOneUpdate)->Arg(2)->Arg(10)->Arg(30);

void BM_Iboss(benchmark::State& state) {
  const DataMatrix& d = dataset(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(seeding::iboss_seed(d, 100));
}
BENCHMARK(BM_Iboss)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Oss(benchmark::State& state) {
  const DataMatrix& d = dataset(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(seeding::oss_seed(d, 100));
}
BENCHMARK(BM_Oss)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Alg1(benchmark::State& state) {
  const DataMatrix& d = dataset(10000, 10);
  const Selection seed = seeding::oss_seed(d, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exchange::alg1(d, seed, state.range(0), {5, false}));
  }
}
BENCHMARK(BM_Alg1)->Arg(10)->Arg(25)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Valg1(benchmark::State& state) {
  const DataMatrix& d = dataset(10000, 10);
  const Selection seed = seeding::oss_seed(d, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exchange::valg1(d, seed, state.range(0)));
  }
}
BENCHMARK(BM_Valg1)->Arg(10)->Arg(25)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
