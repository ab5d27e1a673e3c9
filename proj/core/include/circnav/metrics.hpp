#pragma once

#include "circnav/logs.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace circnav {

/// sqrt(mean(e^2)); throws an empty-window error for no samples.
double rmse(std::span<const double> errors);

struct Series {
  std::vector<double> t;
  std::vector<double> value;
};

struct PairRmse {
  std::string pair;  // "i-j": agent i's estimate of p_i - p_j
  std::string kind;  // modified | classical | rls
  double rmse = 0.0;
};

struct AgentTargetMetrics {
  int agent = 0;
  double rmse_estimate = 0.0;     // e^e over the window
  double rmse_measurement = 0.0;  // e^m over window steps that had a measurement (nan if none)
  double max_estimate = 0.0;
  long direct = 0;  // mode counts over the whole run
  long indirect = 0;
  long none = 0;
};

struct AgentFormationMetrics {
  int agent = 0;
  double mean_abs_radius_error = 0.0;  // true |p_i0| - rho, over the window
  double max_abs_radius_error = 0.0;
  double mean_abs_yaw_error = 0.0;  // |wrap(psi - psi_hat)|
  double max_abs_yaw_error = 0.0;
};

struct RunMetrics {
  double window_start = 0.0;
  std::vector<PairRmse> relative;
  std::map<std::string, double> relative_mean;  // kind -> mean over pairs
  std::vector<AgentTargetMetrics> target;
  std::map<int, Series> target_error;       // e^e per agent, whole run
  std::map<int, Series> target_meas_error;  // e^m per agent
  std::map<int, Series> radius_error;       // true radius error per agent
  std::vector<AgentFormationMetrics> formation;
  // Sorted-phase gaps of the agents logged at each controller step.
  std::vector<double> phase_gap_t;
  std::vector<std::vector<double>> phase_gaps;
};

/// Works from logs alone; tables that are absent are skipped, but a table that
/// is present must carry every column used (schema error names the column).
RunMetrics compute_metrics(const LogSet& logs, double window_start);

std::string metrics_to_json(const RunMetrics& m, int indent = 2);

}  // namespace circnav
