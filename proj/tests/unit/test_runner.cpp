#include "circnav/config.hpp"
#include "circnav/error.hpp"
#include "circnav/runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

using namespace circnav;

namespace {

ScenarioConfig short_pair(double duration = 5.0) {
  ScenarioConfig c = builtin_scenario("indoor-pair");
  c.world.duration = duration;
  c.output.rmse_window_start = 0.0;
  return c;
}

ScenarioConfig noiseless_pair() {
  ScenarioConfig c = builtin_scenario("indoor-pair");
  c.sensors.vio = VioNoise{0.0, 0.0};
  c.sensors.uwb = UwbNoiseModel{0.0, 0.0, 0.5, 3.0};
  c.sensors.camera.pixel_noise_std = 0.0;
  c.sensors.camera.depth_noise_std = 0.0;
  return c;
}

}  // namespace

TEST(Runner, EveryStepLoggedOncePerEntity) {
  const ScenarioConfig c = short_pair();
  const RunResult r = run_scenario(c);
  const long steps = std::lround(c.world.duration / c.world.dt);
  const CsvTable& world = r.logs.at(logs::kWorld);
  std::map<std::pair<long, std::string>, int> seen;
  const std::size_t ck = world.column("k"), ce = world.column("entity");
  for (std::size_t i = 0; i < world.size(); ++i) ++seen[{world.integer(i, ck), world.text(i, ce)}];
  EXPECT_EQ(seen.size(), static_cast<std::size_t>((steps + 1) * 3));
  for (const auto& [key, n] : seen) EXPECT_EQ(n, 1);

  const CsvTable& ctl = r.logs.at(logs::kController);
  EXPECT_EQ(ctl.size(), static_cast<std::size_t>((steps + 1) * 2));
}

TEST(Runner, SameSeedSameLogs) {
  const RunResult a = run_scenario(short_pair()), b = run_scenario(short_pair());
  for (const auto& [name, table] : a.logs) EXPECT_EQ(table.to_csv(), b.logs.at(name).to_csv()) << name;
}

TEST(Runner, DifferentSeedDifferentLogs) {
  ScenarioConfig c = short_pair();
  const RunResult a = run_scenario(c);
  c.seed += 1;
  const RunResult b = run_scenario(c);
  EXPECT_NE(a.logs.at(logs::kRelative).to_csv(), b.logs.at(logs::kRelative).to_csv());
}

TEST(Runner, WritesOutputDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "circnav_runner_test";
  std::filesystem::remove_all(dir);
  ScenarioConfig c = short_pair(2.0);
  c.output.dir = dir.string();
  run_scenario(c);
  for (const char* f : {"world.csv", "relative.csv", "target.csv", "controller.csv", "metrics.json", "config.toml"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const ScenarioConfig back = load_config((dir / "config.toml").string());
  EXPECT_EQ(back.seed, c.seed);
  std::filesystem::remove_all(dir);
}

TEST(Runner, CommsCountersBalance) {
  ScenarioConfig c = short_pair();
  c.comms.policy.loss_probability = 0.2;
  c.comms.policy.delay_steps = 1;
  const RunResult r = run_scenario(c);
  EXPECT_EQ(r.comms.emitted, r.comms.delivered + r.comms.dropped + r.comms.in_flight);
  EXPECT_GT(r.comms.dropped, 0u);
}

TEST(Runner, FailureRemovesAgentFromControllerLog) {
  ScenarioConfig c = builtin_scenario("outdoor-three-failure");
  c.world.duration = 70.0;
  const RunResult r = run_scenario(c);
  const CsvTable& ctl = r.logs.at(logs::kController);
  const std::size_t ct = ctl.column("t"), ca = ctl.column("agent");
  std::set<long> after;
  for (std::size_t i = 0; i < ctl.size(); ++i) {
    if (ctl.real(i, ct) > 61.0) after.insert(ctl.integer(i, ca));
  }
  EXPECT_EQ(after, (std::set<long>{1, 3}));
}

TEST(CompareEstimators, OneTrialHasOneValuePerKind) {
  ScenarioConfig c = short_pair(25.0);
  c.output.rmse_window_start = 20.0;
  const EstimatorComparison cmp = compare_estimators(c, 1);
  EXPECT_EQ(cmp.seeds.size(), 1u);
  for (const char* kind : {"modified", "classical", "rls"}) {
    ASSERT_EQ(cmp.per_trial.at(kind).size(), 1u);
    EXPECT_TRUE(std::isfinite(cmp.mean.at(kind)));
  }
}

TEST(CompareEstimators, ZeroTrialsIsError) {
  EXPECT_THROW(compare_estimators(short_pair(), 0), Error);
}

TEST(CompareEstimators, NoiselessRunIsAccurateForAllKinds) {
  const EstimatorComparison cmp = compare_estimators(noiseless_pair(), 1);
  for (const char* kind : {"modified", "classical", "rls"}) EXPECT_LT(cmp.mean.at(kind), 0.05) << kind;
}
