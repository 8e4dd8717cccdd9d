#include <benchmark/benchmark.h>

#include <vector>

#include "expjump/distributions.hpp"
#include "expjump/fredholm.hpp"
#include "expjump/limitshape.hpp"
#include "expjump/model.hpp"
#include "expjump/qspecial.hpp"
#include "expjump/simulator.hpp"

using namespace expjump;

namespace {

const QParam kHalf(0.5);

void BM_PhiN(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(qspecial::phi_n(1, 0.5, kHalf));
}
BENCHMARK(BM_PhiN);

void BM_Classify(benchmark::State& st) {
  const SpeedField f(0.7, {0.0, 0.2}, {1.0, 0.4});
  for (auto _ : st) benchmark::DoNotOptimize(limitshape::classify(3.0, 0.1, f, Roadblocks{}, kHalf));
}
BENCHMARK(BM_Classify);

void BM_F2(benchmark::State& st) {
  const int nodes = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(dist::F2_airy(-2.0, nodes));
}
BENCHMARK(BM_F2)->Arg(20)->Arg(40)->Arg(80);

void BM_BBP(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(dist::BBP(0.0, 1, {0.0}));
}
BENCHMARK(BM_BBP)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& st) {
  const double lambda = static_cast<double>(st.range(0));
  const auto hom = SpeedField::homogeneous(1.0);
  std::uint64_t seed = 1;
  for (auto _ : st) {
    sim::ExpJumpSimulator s(hom, Roadblocks{}, ModelParams(0.5, lambda), seed++);
    s.run_until(lambda);
    benchmark::DoNotOptimize(s.height(0.1));
  }
}
BENCHMARK(BM_Simulate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_FredholmDet(benchmark::State& st) {
  const auto hom = SpeedField::homogeneous(1.0);
  const fredholm::DetOptions fast{false, 0.0};
  for (auto _ : st) {
    benchmark::DoNotOptimize(fredholm::qlaplace_det(fredholm::ZetaPoint(-1.0), 2.5, 0.3, hom, Roadblocks{},
                                                    ModelParams(0.5, 5.0), fredholm::ContourSpec{}, {}, fast));
  }
}
BENCHMARK(BM_FredholmDet)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
