#include "circnav/config.hpp"

#include "circnav/error.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace circnav {

MotionProfile TargetConfig::profile() const {
  switch (kind) {
    case MotionProfile::Kind::stationary: return MotionProfile::stationary();
    case MotionProfile::Kind::waypoint_path: return MotionProfile::waypoint_path(waypoints, speed, loop);
    case MotionProfile::Kind::scripted_velocity: return MotionProfile::scripted_velocity(velocity_table);
  }
  return MotionProfile::stationary();
}

std::string_view to_string(AgentMode mode) {
  return mode == AgentMode::circumnavigate ? "circumnavigate" : "scripted-circle";
}

ControllerGains ControllerConfig::gains(int n_agents, double dt) const {
  ControllerGains g;
  g.rho = rho;
  g.delta_theta = 2.0 * std::numbers::pi * dt / orbit_period;
  g.coupling = coupling.empty() ? ControllerGains::default_coupling(n_agents) : coupling;
  g.k_p = k_p;
  g.k_v = k_v;
  g.k_rho = k_rho;
  g.u1_max = u1_max;
  g.u2_max = u2_max;
  g.k_psi = k_psi;
  return g;
}

namespace {

using Issue = ConfigError::Issue;

bool is_psd(const auto& m) {
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  using M = std::decay_t<decltype(m)>;
  Eigen::SelfAdjointEigenSolver<typename M::PlainObject> es(m);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

std::string_view kind_name(MotionProfile::Kind k) {
  switch (k) {
    case MotionProfile::Kind::stationary: return "stationary";
    case MotionProfile::Kind::waypoint_path: return "waypoint-path";
    case MotionProfile::Kind::scripted_velocity: return "scripted-velocity";
  }
  return "stationary";
}

// ---------------------------------------------------------------------------
// TOML reading with field-path error collection.

class Reader {
 public:
  explicit Reader(std::vector<Issue>& issues) : issues_(issues) {}

  void fail(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

  void reject_unknown(const toml::table& t, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& [k, _] : t) {
      if (std::find(known.begin(), known.end(), k.str()) == known.end()) {
        fail(join(path, std::string(k.str())), "unknown key");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  const toml::table* table(const toml::table& t, std::string_view key, const std::string& path) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return nullptr;
    if (!n->is_table()) {
      fail(join(path, std::string(key)), "expected a table");
      return nullptr;
    }
    return n->as_table();
  }

  void number(const toml::table& t, std::string_view key, const std::string& path, double& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
      out = *v;
    } else {
      fail(join(path, std::string(key)), "expected a number");
    }
  }

  template <typename Int>
  void integer(const toml::table& t, std::string_view key, const std::string& path, Int& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    if (auto v = n->value<std::int64_t>(); v && n->is_integer()) {
      out = static_cast<Int>(*v);
    } else {
      fail(join(path, std::string(key)), "expected an integer");
    }
  }

  void boolean(const toml::table& t, std::string_view key, const std::string& path, bool& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    if (auto v = n->value<bool>()) {
      out = *v;
    } else {
      fail(join(path, std::string(key)), "expected a boolean");
    }
  }

  void string(const toml::table& t, std::string_view key, const std::string& path, std::string& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    if (auto v = n->value<std::string>()) {
      out = *v;
    } else {
      fail(join(path, std::string(key)), "expected a string");
    }
  }

  std::optional<std::vector<double>> numbers(const toml::node& n, const std::string& path) {
    const toml::array* arr = n.as_array();
    if (arr == nullptr) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : *arr) {
      auto v = e.value<double>();
      if (!v || !(e.is_floating_point() || e.is_integer())) {
        fail(path, "expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

  void list(const toml::table& t, std::string_view key, const std::string& path, std::vector<double>& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    if (auto v = numbers(*n, join(path, std::string(key)))) out = *v;
  }

  template <int N>
  void vector(const toml::table& t, std::string_view key, const std::string& path,
              Eigen::Matrix<double, N, 1>& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    const std::string p = join(path, std::string(key));
    auto v = numbers(*n, p);
    if (!v) return;
    if (static_cast<int>(v->size()) != N) {
      fail(p, fmt::format("expected {} numbers", N));
      return;
    }
    for (int i = 0; i < N; ++i) out(i) = (*v)[static_cast<std::size_t>(i)];
  }

  /// Either a flat diagonal or nested rows.
  template <int N>
  void matrix(const toml::table& t, std::string_view key, const std::string& path,
              Eigen::Matrix<double, N, N>& out) {
    const toml::node* n = t.get(key);
    if (n == nullptr) return;
    const std::string p = join(path, std::string(key));
    const toml::array* arr = n->as_array();
    if (arr == nullptr) {
      fail(p, "expected a diagonal list or a nested matrix");
      return;
    }
    if (!arr->empty() && arr->front().is_array()) {
      if (static_cast<int>(arr->size()) != N) {
        fail(p, fmt::format("expected {} rows", N));
        return;
      }
      Eigen::Matrix<double, N, N> m;
      for (int r = 0; r < N; ++r) {
        auto row = numbers((*arr)[static_cast<std::size_t>(r)], p);
        if (!row) return;
        if (static_cast<int>(row->size()) != N) {
          fail(p, fmt::format("expected {} columns", N));
          return;
        }
        for (int c = 0; c < N; ++c) m(r, c) = (*row)[static_cast<std::size_t>(c)];
      }
      out = m;
      return;
    }
    auto diag = numbers(*n, p);
    if (!diag) return;
    if (static_cast<int>(diag->size()) != N) {
      fail(p, fmt::format("expected {} diagonal entries", N));
      return;
    }
    out.setZero();
    for (int i = 0; i < N; ++i) out(i, i) = (*diag)[static_cast<std::size_t>(i)];
  }

  std::vector<std::vector<double>> rows(const toml::table& t, std::string_view key, const std::string& path,
                                        std::size_t width, bool& present) {
    present = false;
    std::vector<std::vector<double>> out;
    const toml::node* n = t.get(key);
    if (n == nullptr) return out;
    present = true;
    const std::string p = join(path, std::string(key));
    const toml::array* arr = n->as_array();
    if (arr == nullptr) {
      fail(p, "expected an array of arrays");
      return out;
    }
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string ep = fmt::format("{}[{}]", p, i);
      auto row = numbers((*arr)[i], ep);
      if (!row) continue;
      if (row->size() != width) {
        fail(ep, fmt::format("expected {} numbers", width));
        continue;
      }
      out.push_back(*row);
    }
    return out;
  }

 private:
  std::vector<Issue>& issues_;
};

void read_world(Reader& r, const toml::table& t, WorldConfig& w) {
  const std::string path = "world";
  r.reject_unknown(t, path,
                   {"agents", "dt", "duration", "initial_radius", "initial_phases_deg", "agent_process_std",
                    "target_process_std", "obstacles", "failures", "target"});
  r.integer(t, "agents", path, w.n_agents);
  r.number(t, "dt", path, w.dt);
  r.number(t, "duration", path, w.duration);
  r.number(t, "initial_radius", path, w.initial_radius);
  r.list(t, "initial_phases_deg", path, w.initial_phases_deg);
  r.vector<4>(t, "agent_process_std", path, w.agent_process_std);
  r.vector<4>(t, "target_process_std", path, w.target_process_std);
  bool present = false;
  auto obs = r.rows(t, "obstacles", path, 4, present);
  if (present) {
    w.obstacles.clear();
    for (const auto& o : obs) w.obstacles.push_back({Vec2(o[0], o[1]), Vec2(o[2], o[3])});
  }
  if (const toml::node* n = t.get("failures")) {
    w.failures.clear();
    const toml::array* arr = n->as_array();
    if (arr == nullptr) {
      r.fail("world.failures", "expected an array of tables");
    } else {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string ep = fmt::format("world.failures[{}]", i);
        const toml::table* ft = (*arr)[i].as_table();
        if (ft == nullptr) {
          r.fail(ep, "expected a table {agent, t}");
          continue;
        }
        r.reject_unknown(*ft, ep, {"agent", "t"});
        FailureEvent e{0, -1.0};
        r.integer(*ft, "agent", ep, e.agent_id);
        r.number(*ft, "t", ep, e.t_fail);
        if (!ft->contains("agent") || !ft->contains("t")) r.fail(ep, "needs both agent and t");
        w.failures.push_back(e);
      }
    }
  }
  if (const toml::table* tt = r.table(t, "target", path)) {
    const std::string tp = "world.target";
    r.reject_unknown(*tt, tp, {"kind", "position", "waypoints", "speed", "loop", "velocity_table"});
    std::string kind(kind_name(w.target.kind));
    r.string(*tt, "kind", tp, kind);
    if (kind == "stationary") {
      w.target.kind = MotionProfile::Kind::stationary;
    } else if (kind == "waypoint-path") {
      w.target.kind = MotionProfile::Kind::waypoint_path;
    } else if (kind == "scripted-velocity") {
      w.target.kind = MotionProfile::Kind::scripted_velocity;
    } else {
      r.fail(tp + ".kind", "expected stationary | waypoint-path | scripted-velocity");
    }
    r.vector<2>(*tt, "position", tp, w.target.initial_position);
    auto wps = r.rows(*tt, "waypoints", tp, 2, present);
    if (present) {
      w.target.waypoints.clear();
      for (const auto& p : wps) w.target.waypoints.emplace_back(p[0], p[1]);
    }
    r.number(*tt, "speed", tp, w.target.speed);
    r.boolean(*tt, "loop", tp, w.target.loop);
    auto table = r.rows(*tt, "velocity_table", tp, 3, present);
    if (present) {
      w.target.velocity_table.clear();
      for (const auto& k : table) w.target.velocity_table.push_back({k[0], Vec2(k[1], k[2])});
    }
  }
}

void read_sensors(Reader& r, const toml::table& t, SensorConfig& s) {
  r.reject_unknown(t, "sensors", {"vio", "uwb", "camera"});
  if (const toml::table* v = r.table(t, "vio", "sensors")) {
    r.reject_unknown(*v, "sensors.vio", {"displacement_std", "yaw_std"});
    r.number(*v, "displacement_std", "sensors.vio", s.vio.displacement_std);
    r.number(*v, "yaw_std", "sensors.vio", s.vio.yaw_std);
  }
  if (const toml::table* u = r.table(t, "uwb", "sensors")) {
    const std::string p = "sensors.uwb";
    r.reject_unknown(*u, p, {"sigma", "p_outlier", "outlier_min", "outlier_max", "rate_hz", "beta", "sigma_star"});
    r.number(*u, "sigma", p, s.uwb.sigma);
    r.number(*u, "p_outlier", p, s.uwb.p_outlier);
    r.number(*u, "outlier_min", p, s.uwb.outlier_min);
    r.number(*u, "outlier_max", p, s.uwb.outlier_max);
    r.number(*u, "rate_hz", p, s.uwb_rate_hz);
    r.number(*u, "beta", p, s.uwb_beta);
    r.number(*u, "sigma_star", p, s.uwb_sigma_star);
  }
  if (const toml::table* c = r.table(t, "camera", "sensors")) {
    const std::string p = "sensors.camera";
    r.reject_unknown(*c, p,
                     {"K", "R_C", "T_C", "fov_half_angle_deg", "max_depth", "pixel_noise_std", "depth_noise_std"});
    r.matrix<3>(*c, "K", p, s.camera.K);
    r.matrix<3>(*c, "R_C", p, s.camera.R_C);
    r.vector<3>(*c, "T_C", p, s.camera.T_C);
    double fov_deg = s.camera.fov_half_angle * 180.0 / std::numbers::pi;
    r.number(*c, "fov_half_angle_deg", p, fov_deg);
    s.camera.fov_half_angle = fov_deg * std::numbers::pi / 180.0;
    r.number(*c, "max_depth", p, s.camera.max_depth);
    r.number(*c, "pixel_noise_std", p, s.camera.pixel_noise_std);
    r.number(*c, "depth_noise_std", p, s.camera.depth_noise_std);
  }
}

void read_relative(Reader& r, const toml::table& t, RelativeConfig& rel) {
  const std::string p = "relative";
  r.reject_unknown(t, p, {"Q", "sigma_star", "sigma_delta", "a", "P0", "rls_forgetting", "rls_initial_gain", "init",
                          "init_position_std"});
  r.matrix<4>(t, "Q", p, rel.filter.Q);
  r.matrix<3>(t, "sigma_star", p, rel.filter.sigma_star);
  r.matrix<2>(t, "sigma_delta", p, rel.filter.sigma_delta);
  r.number(t, "a", p, rel.filter.a);
  r.vector<4>(t, "P0", p, rel.filter.P0_diag);
  r.number(t, "rls_forgetting", p, rel.rls_forgetting);
  r.number(t, "rls_initial_gain", p, rel.rls_initial_gain);
  r.string(t, "init", p, rel.init);
  r.number(t, "init_position_std", p, rel.init_position_std);
}

void read_target_estimator(Reader& r, const toml::table& t, TargetEstimatorConfig& te) {
  const std::string p = "target_estimator";
  r.reject_unknown(t, p, {"epsilon", "Q_rate", "P0", "sigma_q", "max_prior_staleness"});
  r.number(t, "epsilon", p, te.epsilon);
  r.vector<4>(t, "Q_rate", p, te.Q_rate_diag);
  r.vector<4>(t, "P0", p, te.P0_diag);
  r.matrix<2>(t, "sigma_q", p, te.sigma_q);
  r.integer(t, "max_prior_staleness", p, te.max_prior_staleness);
}

void read_controller(Reader& r, const toml::table& t, ControllerConfig& c) {
  const std::string p = "controller";
  r.reject_unknown(t, p,
                   {"mode", "rho", "orbit_period", "coupling", "k_p", "k_v", "k_rho", "u1_max", "u2_max", "k_psi",
                    "scripted_radius", "scripted_period"});
  std::string mode(to_string(c.mode));
  r.string(t, "mode", p, mode);
  if (mode == "circumnavigate") {
    c.mode = AgentMode::circumnavigate;
  } else if (mode == "scripted-circle") {
    c.mode = AgentMode::scripted_circle;
  } else {
    r.fail("controller.mode", "expected circumnavigate | scripted-circle");
  }
  r.number(t, "rho", p, c.rho);
  r.number(t, "orbit_period", p, c.orbit_period);
  r.list(t, "coupling", p, c.coupling);
  r.number(t, "k_p", p, c.k_p);
  r.number(t, "k_v", p, c.k_v);
  r.number(t, "k_rho", p, c.k_rho);
  r.number(t, "u1_max", p, c.u1_max);
  r.number(t, "u2_max", p, c.u2_max);
  r.number(t, "k_psi", p, c.k_psi);
  r.number(t, "scripted_radius", p, c.scripted_radius);
  r.number(t, "scripted_period", p, c.scripted_period);
}

void read_comms(Reader& r, const toml::table& t, CommsConfig& c) {
  const std::string p = "comms";
  r.reject_unknown(t, p, {"topology", "edges", "loss", "delay", "trace"});
  r.string(t, "topology", p, c.topology);
  bool present = false;
  auto edges = r.rows(t, "edges", p, 2, present);
  if (present) {
    c.edges.clear();
    for (const auto& e : edges) c.edges.emplace_back(static_cast<int>(e[0]), static_cast<int>(e[1]));
  }
  r.number(t, "loss", p, c.policy.loss_probability);
  r.integer(t, "delay", p, c.policy.delay_steps);
  r.boolean(t, "trace", p, c.trace);
}

void read_output(Reader& r, const toml::table& t, OutputConfig& o) {
  const std::string p = "output";
  r.reject_unknown(t, p, {"dir", "rmse_window_start", "log_uwb"});
  r.string(t, "dir", p, o.dir);
  r.number(t, "rmse_window_start", p, o.rmse_window_start);
  r.boolean(t, "log_uwb", p, o.log_uwb);
}

// ---------------------------------------------------------------------------
// TOML writing. Numbers use 17 significant digits so parsing is exact.

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.17g}", v);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

template <typename Range>
std::string num_list(const Range& values) {
  std::string s = "[";
  bool first = true;
  for (double v : values) {
    if (!first) s += ", ";
    s += num(v);
    first = false;
  }
  return s + "]";
}

template <int N>
std::string vec_str(const Eigen::Matrix<double, N, 1>& v) {
  std::vector<double> vals(v.data(), v.data() + N);
  return num_list(vals);
}

template <int N>
std::string mat_str(const Eigen::Matrix<double, N, N>& m) {
  std::string s = "[";
  for (int r = 0; r < N; ++r) {
    if (r > 0) s += ", ";
    Eigen::Matrix<double, N, 1> row = m.row(r).transpose();
    s += vec_str<N>(row);
  }
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ScenarioConfig parse_config(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError({{"<toml>", msg.str()}});
  }

  std::vector<Issue> issues;
  Reader r(issues);
  ScenarioConfig cfg;
  r.reject_unknown(root, "",
                   {"schema_version", "name", "seed", "world", "sensors", "relative", "target_estimator",
                    "controller", "comms", "output"});
  cfg.schema_version = -1;
  r.integer(root, "schema_version", "", cfg.schema_version);
  if (!root.contains("schema_version")) issues.push_back({"schema_version", "missing"});
  r.string(root, "name", "", cfg.name);
  if (!root.contains("seed")) {
    issues.push_back({"seed", "missing (runs must be seeded)"});
  } else {
    std::int64_t seed = 0;
    r.integer(root, "seed", "", seed);
    if (seed < 0) issues.push_back({"seed", "must be non-negative"});
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (const toml::table* t = r.table(root, "world", "")) read_world(r, *t, cfg.world);
  if (const toml::table* t = r.table(root, "sensors", "")) read_sensors(r, *t, cfg.sensors);
  if (const toml::table* t = r.table(root, "relative", "")) read_relative(r, *t, cfg.relative);
  if (const toml::table* t = r.table(root, "target_estimator", "")) read_target_estimator(r, *t, cfg.target_estimator);
  if (const toml::table* t = r.table(root, "controller", "")) read_controller(r, *t, cfg.controller);
  if (const toml::table* t = r.table(root, "comms", "")) read_comms(r, *t, cfg.comms);
  if (const toml::table* t = r.table(root, "output", "")) read_output(r, *t, cfg.output);
  // Report read and semantic problems together. Fields that failed to read
  // keep their defaults, so validation does not repeat them.
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    for (const auto& issue : e.issues()) {
      if (issue.field == "schema_version" && !root.contains("schema_version")) continue;
      issues.push_back(issue);
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{"--config", "cannot open " + path}});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ScenarioConfig::validate() const {
  std::vector<Issue> issues;
  auto need = [&](bool ok, const char* field, const char* msg) {
    if (!ok) issues.push_back({field, msg});
  };
  need(schema_version == kSchemaVersion, "schema_version", "unsupported schema version (expected 1)");
  const auto& w = world;
  need(w.n_agents >= 1, "world.agents", "must be >= 1");
  need(w.dt > 0.0 && std::isfinite(w.dt), "world.dt", "must be positive");
  need(w.duration > 0.0 && std::isfinite(w.duration), "world.duration", "must be positive");
  need(w.initial_radius >= 0.0, "world.initial_radius", "must be >= 0");
  need(w.initial_phases_deg.empty() || static_cast<int>(w.initial_phases_deg.size()) == w.n_agents,
       "world.initial_phases_deg", "needs one phase per agent");
  need((w.agent_process_std.array() >= 0.0).all(), "world.agent_process_std", "must be >= 0");
  need((w.target_process_std.array() >= 0.0).all(), "world.target_process_std", "must be >= 0");
  for (const auto& o : w.obstacles) {
    if (o.a == o.b || !o.a.allFinite() || !o.b.allFinite()) {
      issues.push_back({"world.obstacles", "segment endpoints must be finite and distinct"});
    }
  }
  std::set<int> failing;
  for (const auto& f : w.failures) {
    if (f.agent_id < 1 || f.agent_id > w.n_agents) {
      issues.push_back({"world.failures", fmt::format("unknown agent id {}", f.agent_id)});
    } else if (!failing.insert(f.agent_id).second) {
      issues.push_back({"world.failures", fmt::format("agent {} fails twice", f.agent_id)});
    }
    if (!(f.t_fail >= 0.0)) issues.push_back({"world.failures", "failure time must be >= 0"});
  }
  try {
    (void)w.target.profile();
  } catch (const Error& e) {
    issues.push_back({"world.target", e.what()});
  }

  const auto& s = sensors;
  need(s.vio.displacement_std >= 0.0, "sensors.vio.displacement_std", "must be >= 0");
  need(s.vio.yaw_std >= 0.0, "sensors.vio.yaw_std", "must be >= 0");
  need(s.uwb.sigma >= 0.0, "sensors.uwb.sigma", "must be >= 0");
  need(s.uwb.p_outlier >= 0.0 && s.uwb.p_outlier <= 1.0, "sensors.uwb.p_outlier", "must lie in [0, 1]");
  need(s.uwb.outlier_min >= 0.0 && s.uwb.outlier_max >= s.uwb.outlier_min, "sensors.uwb.outlier_max",
       "needs 0 <= outlier_min <= outlier_max");
  need(s.uwb_rate_hz > 0.0, "sensors.uwb.rate_hz", "must be positive");
  try {
    if (s.uwb_rate_hz > 0.0 && w.dt > 0.0) (void)make_uwb_stream(s.uwb_beta, s.uwb_sigma_star, 1.0 / s.uwb_rate_hz, w.dt);
  } catch (const ConfigError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  try {
    s.camera.validate();
  } catch (const ConfigError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }

  const auto& rf = relative.filter;
  need(is_psd(rf.Q), "relative.Q", "must be symmetric PSD");
  need(is_psd(rf.sigma_star), "relative.sigma_star", "must be symmetric PSD");
  need(is_psd(rf.sigma_delta), "relative.sigma_delta", "must be symmetric PSD");
  need(rf.a > 0.0 && rf.a < 1.0, "relative.a", "must lie in (0, 1)");
  need((rf.P0_diag.array() > 0.0).all(), "relative.P0", "must be positive");
  need(relative.rls_forgetting > 0.0 && relative.rls_forgetting <= 1.0, "relative.rls_forgetting",
       "must lie in (0, 1]");
  need(relative.rls_initial_gain > 0.0, "relative.rls_initial_gain", "must be positive");
  need(relative.init == "zero" || relative.init == "approximate", "relative.init", "expected zero | approximate");
  need(relative.init_position_std >= 0.0, "relative.init_position_std", "must be >= 0");

  const auto& te = target_estimator;
  need(te.epsilon > 0.0 && te.epsilon < 1.0, "target_estimator.epsilon", "must lie in (0, 1)");
  need((te.Q_rate_diag.array() >= 0.0).all(), "target_estimator.Q_rate", "must be >= 0");
  need((te.P0_diag.array() > 0.0).all(), "target_estimator.P0", "must be positive");
  need(is_psd(te.sigma_q) && te.sigma_q.determinant() > 0.0, "target_estimator.sigma_q",
       "must be symmetric positive definite");
  need(te.max_prior_staleness >= 0, "target_estimator.max_prior_staleness", "must be >= 0");

  const auto& c = controller;
  need(c.rho > 0.0, "controller.rho", "must be positive");
  need(c.orbit_period != 0.0 && std::isfinite(c.orbit_period), "controller.orbit_period", "must be non-zero");
  need(c.coupling.empty() || static_cast<int>(c.coupling.size()) == w.n_agents, "controller.coupling",
       "needs one gain per agent (G_1..G_N)");
  need(c.k_p > 0.0, "controller.k_p", "must be positive");
  need(c.k_v > 0.0, "controller.k_v", "must be positive");
  need(c.k_rho > 0.0, "controller.k_rho", "must be positive");
  need(c.u1_max > 0.0, "controller.u1_max", "must be positive");
  need(c.u2_max > 0.0, "controller.u2_max", "must be positive");
  need(c.k_psi > 0.0, "controller.k_psi", "must be positive");
  need(c.scripted_radius > 0.0, "controller.scripted_radius", "must be positive");
  need(c.scripted_period != 0.0, "controller.scripted_period", "must be non-zero");

  need(comms.topology == "full" || comms.topology == "ring" || comms.topology == "edges", "comms.topology",
       "expected full | ring | edges");
  for (const auto& [a, b] : comms.edges) {
    if (a < 1 || b < 1 || a > w.n_agents || b > w.n_agents || a == b) {
      issues.push_back({"comms.edges", fmt::format("invalid edge [{}, {}]", a, b)});
    }
  }
  need(comms.policy.loss_probability >= 0.0 && comms.policy.loss_probability <= 1.0, "comms.loss",
       "must lie in [0, 1]");
  need(comms.policy.delay_steps >= 0, "comms.delay", "must be >= 0");
  need(output.rmse_window_start >= 0.0, "output.rmse_window_start", "must be >= 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string to_toml(const ScenarioConfig& c) {
  std::string s;
  auto line = [&](const std::string& key, const std::string& value) { s += key + " = " + value + "\n"; };
  line("schema_version", std::to_string(c.schema_version));
  line("name", quoted(c.name));
  line("seed", std::to_string(c.seed));

  const auto& w = c.world;
  s += "\n[world]\n";
  line("agents", std::to_string(w.n_agents));
  line("dt", num(w.dt));
  line("duration", num(w.duration));
  line("initial_radius", num(w.initial_radius));
  line("initial_phases_deg", num_list(w.initial_phases_deg));
  line("agent_process_std", vec_str<4>(w.agent_process_std));
  line("target_process_std", vec_str<4>(w.target_process_std));
  {
    std::string obs = "[";
    for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
      if (i > 0) obs += ", ";
      const auto& o = w.obstacles[i];
      obs += num_list(std::vector<double>{o.a.x(), o.a.y(), o.b.x(), o.b.y()});
    }
    line("obstacles", obs + "]");
    std::string fails = "[";
    for (std::size_t i = 0; i < w.failures.size(); ++i) {
      if (i > 0) fails += ", ";
      fails += fmt::format("{{ agent = {}, t = {} }}", w.failures[i].agent_id, num(w.failures[i].t_fail));
    }
    line("failures", fails + "]");
  }
  s += "\n[world.target]\n";
  line("kind", quoted(std::string(kind_name(w.target.kind))));
  line("position", vec_str<2>(w.target.initial_position));
  {
    std::string wps = "[";
    for (std::size_t i = 0; i < w.target.waypoints.size(); ++i) {
      if (i > 0) wps += ", ";
      wps += vec_str<2>(w.target.waypoints[i]);
    }
    line("waypoints", wps + "]");
    line("speed", num(w.target.speed));
    line("loop", w.target.loop ? "true" : "false");
    std::string table = "[";
    for (std::size_t i = 0; i < w.target.velocity_table.size(); ++i) {
      if (i > 0) table += ", ";
      const auto& k = w.target.velocity_table[i];
      table += num_list(std::vector<double>{k.t, k.v.x(), k.v.y()});
    }
    line("velocity_table", table + "]");
  }

  const auto& sn = c.sensors;
  s += "\n[sensors.vio]\n";
  line("displacement_std", num(sn.vio.displacement_std));
  line("yaw_std", num(sn.vio.yaw_std));
  s += "\n[sensors.uwb]\n";
  line("sigma", num(sn.uwb.sigma));
  line("p_outlier", num(sn.uwb.p_outlier));
  line("outlier_min", num(sn.uwb.outlier_min));
  line("outlier_max", num(sn.uwb.outlier_max));
  line("rate_hz", num(sn.uwb_rate_hz));
  line("beta", num(sn.uwb_beta));
  line("sigma_star", num(sn.uwb_sigma_star));
  s += "\n[sensors.camera]\n";
  line("K", mat_str<3>(sn.camera.K));
  line("R_C", mat_str<3>(sn.camera.R_C));
  line("T_C", vec_str<3>(sn.camera.T_C));
  line("fov_half_angle_deg", num(sn.camera.fov_half_angle * 180.0 / std::numbers::pi));
  line("max_depth", num(sn.camera.max_depth));
  line("pixel_noise_std", num(sn.camera.pixel_noise_std));
  line("depth_noise_std", num(sn.camera.depth_noise_std));

  const auto& rel = c.relative;
  s += "\n[relative]\n";
  line("Q", mat_str<4>(rel.filter.Q));
  line("sigma_star", mat_str<3>(rel.filter.sigma_star));
  line("sigma_delta", mat_str<2>(rel.filter.sigma_delta));
  line("a", num(rel.filter.a));
  line("P0", vec_str<4>(rel.filter.P0_diag));
  line("rls_forgetting", num(rel.rls_forgetting));
  line("rls_initial_gain", num(rel.rls_initial_gain));
  line("init", quoted(rel.init));
  line("init_position_std", num(rel.init_position_std));

  const auto& te = c.target_estimator;
  s += "\n[target_estimator]\n";
  line("epsilon", num(te.epsilon));
  line("Q_rate", vec_str<4>(te.Q_rate_diag));
  line("P0", vec_str<4>(te.P0_diag));
  line("sigma_q", mat_str<2>(te.sigma_q));
  line("max_prior_staleness", std::to_string(te.max_prior_staleness));

  const auto& ct = c.controller;
  s += "\n[controller]\n";
  line("mode", quoted(std::string(to_string(ct.mode))));
  line("rho", num(ct.rho));
  line("orbit_period", num(ct.orbit_period));
  line("coupling", num_list(ct.coupling));
  line("k_p", num(ct.k_p));
  line("k_v", num(ct.k_v));
  line("k_rho", num(ct.k_rho));
  line("u1_max", num(ct.u1_max));
  line("u2_max", num(ct.u2_max));
  line("k_psi", num(ct.k_psi));
  line("scripted_radius", num(ct.scripted_radius));
  line("scripted_period", num(ct.scripted_period));

  s += "\n[comms]\n";
  line("topology", quoted(c.comms.topology));
  {
    std::string edges = "[";
    for (std::size_t i = 0; i < c.comms.edges.size(); ++i) {
      if (i > 0) edges += ", ";
      edges += fmt::format("[{}, {}]", c.comms.edges[i].first, c.comms.edges[i].second);
    }
    line("edges", edges + "]");
  }
  line("loss", num(c.comms.policy.loss_probability));
  line("delay", std::to_string(c.comms.policy.delay_steps));
  line("trace", c.comms.trace ? "true" : "false");

  s += "\n[output]\n";
  line("dir", quoted(c.output.dir));
  line("rmse_window_start", num(c.output.rmse_window_start));
  line("log_uwb", c.output.log_uwb ? "true" : "false");
  return s;
}

}  // namespace circnav

namespace circnav {

namespace {

struct Builtin {
  std::string_view name;
  std::string_view description;
  ScenarioConfig (*make)();
};

std::vector<ObstacleSegment> box(double x0, double y0, double x1, double y1) {
  const Vec2 a(x0, y0), b(x1, y0), c(x1, y1), d(x0, y1);
  return {{a, b}, {b, c}, {c, d}, {d, a}};
}

ScenarioConfig indoor_pair() {
  ScenarioConfig c;
  c.name = "indoor-pair";
  c.seed = 1;
  c.world.n_agents = 2;
  c.world.dt = 0.1;
  c.world.duration = 60.0;
  c.world.initial_radius = 2.0;
  c.world.initial_phases_deg = {0.0, 180.0};
  c.controller.mode = AgentMode::scripted_circle;
  c.controller.scripted_radius = 2.0;
  c.controller.scripted_period = 30.0;
  c.output.rmse_window_start = 20.0;
  return c;
}

// The wall box hides the target from agents whose bearing from it lies
// within +-30 deg of the x axis: a 10 s window on a 60 s orbit.
ScenarioConfig indoor_occlusion() {
  ScenarioConfig c;
  c.name = "indoor-occlusion";
  c.seed = 1;
  c.world.n_agents = 2;
  c.world.dt = 0.1;
  c.world.duration = 45.0;
  c.world.initial_radius = 2.0;
  c.world.initial_phases_deg = {215.0, 35.0};
  c.world.obstacles = box(0.8, -0.8 * std::tan(std::numbers::pi / 6.0), 1.2, 0.8 * std::tan(std::numbers::pi / 6.0));
  c.sensors.vio.displacement_std = 0.002;
  c.relative.init = "approximate";
  c.relative.init_position_std = 0.1;
  c.controller.rho = 2.0;
  c.controller.orbit_period = 60.0;
  c.output.rmse_window_start = 10.0;
  return c;
}

ScenarioConfig outdoor_three_failure() {
  ScenarioConfig c;
  c.name = "outdoor-three-failure";
  c.seed = 1;
  c.world.n_agents = 3;
  c.world.dt = 0.1;
  c.world.duration = 150.0;
  c.world.initial_radius = 2.5;
  c.world.initial_phases_deg = {0.0, 50.0, 160.0};
  c.world.agent_process_std = Vec4(0.0, 0.0, 0.002, 0.002);
  c.world.target_process_std = Vec4(0.0, 0.0, 0.002, 0.002);
  c.world.target.kind = MotionProfile::Kind::waypoint_path;
  c.world.target.initial_position = Vec2(0.0, 0.0);
  // A 16-gon of radius 2 m about (0, 2), starting at the origin.
  c.world.target.waypoints.clear();
  for (int i = 0; i < 16; ++i) {
    const double a = -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 16.0;
    c.world.target.waypoints.emplace_back(2.0 * std::cos(a), 2.0 + 2.0 * std::sin(a));
  }
  c.world.target.waypoints.front() = Vec2(0.0, 0.0);
  c.world.target.speed = 0.15;
  c.world.target.loop = true;
  c.world.obstacles = box(-0.2, 1.8, 0.2, 2.2);
  c.sensors.vio.displacement_std = 0.002;
  c.world.failures = {{2, 60.0}};
  c.controller.rho = 2.5;
  c.controller.orbit_period = 60.0;
  c.output.rmse_window_start = 20.0;
  return c;
}

constexpr Builtin kBuiltins[] = {
    {"indoor-pair", "two agents on a scripted 2 m circle (30 s period), stationary target; relative-localization study",
     &indoor_pair},
    {"indoor-occlusion", "two agents circumnavigating a stationary target; a wall hides it from one agent for ~10 s",
     &indoor_occlusion},
    {"outdoor-three-failure", "three agents around a slowly moving target; agent 2 fails at t = 60 s",
     &outdoor_three_failure},
};

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

std::string builtin_scenario_description(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return std::string(b.description);
  }
  throw Error(ErrorKind::configuration, fmt::format("unknown scenario '{}'", name));
}

ScenarioConfig builtin_scenario(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return b.make();
  }
  throw Error(ErrorKind::configuration, fmt::format("unknown scenario '{}'", name));
}

}  // namespace circnav
