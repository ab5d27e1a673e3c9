#pragma once

#include "circnav/config.hpp"
#include "circnav/logs.hpp"
#include "circnav/metrics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace circnav {

/// A recoverable numerical failure: the step fell back to prediction only.
struct RunEvent {
  long k = 0;
  int agent = 0;
  std::string what;
};

struct CommsCounters {
  std::uint64_t emitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
};

struct RunResult {
  LogSet logs;
  RunMetrics metrics;
  std::vector<RunEvent> events;
  CommsCounters comms;
};

/// Runs the full per-step pipeline. When cfg.output.dir is set, writes the CSV
/// logs, metrics.json and the resolved config.toml there.
RunResult run_scenario(const ScenarioConfig& cfg);

struct EstimatorComparison {
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::vector<double>> per_trial;  // kind -> mean-over-pairs RMSE
  std::map<std::string, double> mean;
  double seconds = 0.0;  // wall time
};

/// Runs `trials` copies of cfg with seeds cfg.seed, cfg.seed + 1, ...
EstimatorComparison compare_estimators(const ScenarioConfig& cfg, int trials);

std::string comparison_to_json(const EstimatorComparison& c, int indent = 2);

}  // namespace circnav
