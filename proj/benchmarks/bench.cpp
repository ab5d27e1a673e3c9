#include "circnav/config.hpp"
#include "circnav/relative_estimator.hpp"
#include "circnav/runner.hpp"
#include "circnav/sensors.hpp"
#include "circnav/target_estimator.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace circnav;

static void BM_ModifiedKfStep(benchmark::State& state) {
  const EstimatorConfig cfg;
  RelativeEstimate est = cfg.initial_estimate();
  long k = 1;
  for (auto _ : state) {
    const double t = 0.1 * static_cast<double>(k);
    const PairStepInputs in{3.0 + 0.1 * std::sin(t), 3.0 + 0.1 * std::sin(t - 0.1), Vec2(0.02, -0.01),
                            Vec2(0.1, 0.0), k++};
    est = step_modified_kf(est, in, cfg);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_ModifiedKfStep);

static void BM_DkfUpdate(benchmark::State& state) {
  TargetEstimate prior;
  prior.P = Vec4(0.1, 0.1, 0.5, 0.5).asDiagonal();
  const FusedMeasurement fused{Vec2(1.0, 0.5), 0.0025 * Mat2::Identity(), FusionMode::direct};
  std::vector<NeighborPrior> nbs(static_cast<std::size_t>(state.range(0)),
                                 NeighborPrior{Vec4(1.0, 0.4, 0.0, 0.0), 0.2 * Mat4::Identity()});
  for (auto _ : state) benchmark::DoNotOptimize(dkf_update(prior, fused, nbs, 0.1));
}
BENCHMARK(BM_DkfUpdate)->Arg(0)->Arg(2)->Arg(5);

static void BM_UwbPush(benchmark::State& state) {
  UwbStream stream(make_uwb_stream(0.9, 0.1, 0.005, 0.1));
  long n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.push(n, 3.0 + 0.01 * static_cast<double>(n % 7)));
    ++n;
  }
}
BENCHMARK(BM_UwbPush);

static void BM_IndoorPairRun(benchmark::State& state) {
  const ScenarioConfig cfg = builtin_scenario("indoor-pair");
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg));
}
BENCHMARK(BM_IndoorPairRun)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
