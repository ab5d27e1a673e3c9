#include "circnav/metrics.hpp"

#include "circnav/error.hpp"
#include "circnav/linalg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace circnav {

double rmse(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorKind::empty_window, "RMSE window contains no samples");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

namespace {

bool in_window(double t, double start) { return t >= start - 1e-9; }

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

void relative_metrics(const CsvTable& t, RunMetrics& m) {
  const char* name = logs::kRelative;
  const auto c_t = t.column("t", name);
  const auto c_pair = t.column("pair", name);
  const auto c_kind = t.column("kind", name);
  const auto c_err = t.column("error", name);
  std::map<std::pair<std::string, std::string>, std::vector<double>> errs;
  for (std::size_t r = 0; r < t.size(); ++r) {
    auto& v = errs[{t.text(r, c_pair), t.text(r, c_kind)}];
    if (in_window(t.real(r, c_t), m.window_start)) v.push_back(t.real(r, c_err));
  }
  std::map<std::string, std::vector<double>> per_kind;
  for (const auto& [key, v] : errs) {
    const double value = rmse(v);
    m.relative.push_back({key.first, key.second, value});
    per_kind[key.second].push_back(value);
  }
  for (const auto& [kind, v] : per_kind) {
    double sum = 0.0;
    for (double x : v) sum += x;
    m.relative_mean[kind] = sum / static_cast<double>(v.size());
  }
}

void target_metrics(const CsvTable& t, RunMetrics& m) {
  const char* name = logs::kTarget;
  const auto c_t = t.column("t", name);
  const auto c_agent = t.column("agent", name);
  const auto c_mode = t.column("mode", name);
  const auto c_em = t.column("e_m", name);
  const auto c_ee = t.column("e_e", name);
  std::map<int, AgentTargetMetrics> per;
  std::map<int, std::vector<double>> ee, em;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const int agent = static_cast<int>(t.integer(r, c_agent));
    const double time = t.real(r, c_t);
    auto& a = per[agent];
    a.agent = agent;
    const std::string& mode = t.text(r, c_mode);
    if (mode == "direct") {
      ++a.direct;
    } else if (mode == "indirect") {
      ++a.indirect;
    } else if (mode == "none") {
      ++a.none;
    } else {
      throw Error(ErrorKind::schema, "unknown mode '" + mode + "' in " + std::string(name));
    }
    const double e = t.real(r, c_ee);
    const double meas = t.real(r, c_em);
    m.target_error[agent].t.push_back(time);
    m.target_error[agent].value.push_back(e);
    m.target_meas_error[agent].t.push_back(time);
    m.target_meas_error[agent].value.push_back(meas);
    if (in_window(time, m.window_start)) {
      ee[agent].push_back(e);
      em[agent].push_back(meas);
    }
  }
  for (auto& [agent, a] : per) {
    const auto e = finite_only(ee[agent]);
    a.rmse_estimate = rmse(e);
    a.max_estimate = *std::max_element(e.begin(), e.end());
    const auto meas = finite_only(em[agent]);
    a.rmse_measurement = meas.empty() ? std::nan("") : rmse(meas);
    m.target.push_back(a);
  }
}

void controller_metrics(const CsvTable& t, RunMetrics& m) {
  const char* name = logs::kController;
  const auto c_k = t.column("k", name);
  const auto c_t = t.column("t", name);
  const auto c_agent = t.column("agent", name);
  const auto c_theta = t.column("theta", name);
  const auto c_psi = t.column("psi", name);
  const auto c_psi_hat = t.column("psi_hat", name);
  const auto c_rad = t.column("radius_error_true", name);

  std::map<int, std::vector<double>> rad, yaw;
  long current_k = -1;
  double current_t = 0.0;
  std::vector<double> thetas;
  auto flush = [&]() {
    if (current_k < 0) return;
    std::vector<double> th;
    for (double x : thetas) {
      if (std::isfinite(x)) th.push_back(wrap_two_pi(x));
    }
    if (th.size() >= 2) {
      std::sort(th.begin(), th.end());
      std::vector<double> gaps;
      for (std::size_t i = 0; i + 1 < th.size(); ++i) gaps.push_back(th[i + 1] - th[i]);
      gaps.push_back(2.0 * std::numbers::pi - (th.back() - th.front()));
      m.phase_gap_t.push_back(current_t);
      m.phase_gaps.push_back(std::move(gaps));
    }
    thetas.clear();
  };
  for (std::size_t r = 0; r < t.size(); ++r) {
    const long k = t.integer(r, c_k);
    if (k != current_k) {
      flush();
      current_k = k;
      current_t = t.real(r, c_t);
    }
    thetas.push_back(t.real(r, c_theta));
    const int agent = static_cast<int>(t.integer(r, c_agent));
    const double time = t.real(r, c_t);
    const double re = t.real(r, c_rad);
    m.radius_error[agent].t.push_back(time);
    m.radius_error[agent].value.push_back(re);
    if (in_window(time, m.window_start)) {
      rad[agent].push_back(std::abs(re));
      const double psi = t.real(r, c_psi);
      const double psi_hat = t.real(r, c_psi_hat);
      yaw[agent].push_back(std::abs(wrap_pi(psi - psi_hat)));
    }
  }
  flush();
  for (const auto& [agent, v] : rad) {
    AgentFormationMetrics f;
    f.agent = agent;
    const auto r = finite_only(v);
    const auto y = finite_only(yaw[agent]);
    if (r.empty() || y.empty()) throw Error(ErrorKind::empty_window, "formation window contains no samples");
    double sr = 0.0, sy = 0.0;
    for (double x : r) sr += x;
    for (double x : y) sy += x;
    f.mean_abs_radius_error = sr / static_cast<double>(r.size());
    f.max_abs_radius_error = *std::max_element(r.begin(), r.end());
    f.mean_abs_yaw_error = sy / static_cast<double>(y.size());
    f.max_abs_yaw_error = *std::max_element(y.begin(), y.end());
    m.formation.push_back(f);
  }
}

nlohmann::json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

RunMetrics compute_metrics(const LogSet& set, double window_start) {
  RunMetrics m;
  m.window_start = window_start;
  if (auto it = set.find(logs::kRelative); it != set.end()) relative_metrics(it->second, m);
  if (auto it = set.find(logs::kTarget); it != set.end()) target_metrics(it->second, m);
  if (auto it = set.find(logs::kController); it != set.end()) controller_metrics(it->second, m);
  return m;
}

std::string metrics_to_json(const RunMetrics& m, int indent) {
  nlohmann::json j;
  j["window_start"] = m.window_start;
  auto& rel = j["relative"];
  rel["rmse"] = nlohmann::json::array();
  for (const auto& p : m.relative) {
    rel["rmse"].push_back({{"pair", p.pair}, {"kind", p.kind}, {"rmse", real(p.rmse)}});
  }
  rel["mean_rmse"] = nlohmann::json::object();
  for (const auto& [kind, v] : m.relative_mean) rel["mean_rmse"][kind] = real(v);

  j["target"] = nlohmann::json::array();
  for (const auto& a : m.target) {
    j["target"].push_back({{"agent", a.agent},
                           {"rmse_estimate", real(a.rmse_estimate)},
                           {"rmse_measurement", real(a.rmse_measurement)},
                           {"max_estimate_error", real(a.max_estimate)},
                           {"mode_counts", {{"direct", a.direct}, {"indirect", a.indirect}, {"none", a.none}}}});
  }
  j["formation"] = nlohmann::json::array();
  for (const auto& f : m.formation) {
    j["formation"].push_back({{"agent", f.agent},
                              {"mean_abs_radius_error", real(f.mean_abs_radius_error)},
                              {"max_abs_radius_error", real(f.max_abs_radius_error)},
                              {"mean_abs_yaw_error", real(f.mean_abs_yaw_error)},
                              {"max_abs_yaw_error", real(f.max_abs_yaw_error)}});
  }
  if (!m.phase_gaps.empty()) {
    j["final_phase_gaps"] = m.phase_gaps.back();
    j["final_phase_gap_t"] = m.phase_gap_t.back();
  }
  return j.dump(indent);
}

}  // namespace circnav
