#include <benchmark/benchmark.h>

#include "fpc/classifier.hpp"
#include "fpc/edges.hpp"
#include "fpc/eigenspace.hpp"
#include "fpc/evaluation.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace fpc;

EdgeConfig canny() {
  EdgeConfig cfg;
  cfg.method = EdgeMethod::kCanny;
  return cfg;
}

// Image side length as the argument; FVC images are around 300 pixels.
void BM_Canny(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto img = testing::ridge_image(n, n, 0.4, 7.0, 0.0);
  auto cfg = canny();
  for (auto _ : state) benchmark::DoNotOptimize(canny_edges(img, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_Canny)->Arg(64)->Arg(128)->Arg(300);

// 10 fingers x 4 impressions (the enrolment half of an FVC set).
void BM_Train(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto db = testing::ridge_database(10, 4, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(train(db, {}));
}
BENCHMARK(BM_Train)->Arg(64)->Arg(128)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto db = testing::ridge_database(10, 4, n, 2);
  auto space = train(db, canny());
  auto probe = testing::ridge_image(n, n, 1.0, 6.0, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(verify(space, probe, DecisionConfig{}));
}
BENCHMARK(BM_Verify)->Arg(64)->Arg(300)->Unit(benchmark::kMicrosecond);

void BM_HScan(benchmark::State& state) {
  auto split = split_database(testing::ridge_database(10, 8, 96, 3));
  auto space = train(split.train, canny());
  auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(h_scan(space, split.tests, noise_level("medium"), 7, threads));
}
BENCHMARK(BM_HScan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
