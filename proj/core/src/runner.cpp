#include "circnav/runner.hpp"

#include "circnav/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

namespace circnav {

namespace {

constexpr const char* kKinds[] = {"modified", "classical", "rls"};

struct PairState {
  RelativeEstimate modified;
  RelativeEstimate classical;
  RlsEstimator rls;
  long updates = 0;
  Vec2 last_u_j = Vec2::Zero();
};

struct KnownPhase {
  double theta = 0.0;
  long step = 0;
};

struct AgentRuntime {
  int id = 0;
  RngStream vio_rng{0, 0};
  RngStream camera_rng{0, 0};
  std::map<int, PairState> pairs;  // keyed by neighbor id
  TargetFilter dkf;
  Vec2 u_prev = Vec2::Zero();  // applied over [k-1, k]
  std::optional<double> theta;
  std::map<int, KnownPhase> phases;
  // Per-step readings.
  VioMeasurement vio;
  std::optional<Vec2> q;
  bool los = true;
};

struct UwbPair {
  UwbStream stream;
  RngStream rng{0, 0};
  std::optional<double> d_k;
  std::optional<double> d_km1;
};

// Latest payloads from one sender, as seen by one recipient at step k.
struct Received {
  std::optional<DisplacementPayload> displacement;
  std::optional<ControlPayload> control;
  std::optional<NeighborPacket> packet;
  std::optional<PhasePayload> phase;
};

std::map<int, Received> index_inbox(const std::vector<Message>& inbox, long k, int max_staleness) {
  std::map<int, Received> out;
  for (const auto& msg : inbox) {
    Received& r = out[msg.sender];
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NeighborPacket>) {
            if (k - msg.step <= max_staleness && (!r.packet || r.packet->step <= msg.step)) r.packet = p;
          } else if (msg.step == k) {
            if constexpr (std::is_same_v<T, DisplacementPayload>) r.displacement = p;
            if constexpr (std::is_same_v<T, ControlPayload>) r.control = p;
            if constexpr (std::is_same_v<T, PhasePayload>) r.phase = p;
          }
        },
        msg.payload);
  }
  return out;
}

std::string pair_name(int i, int j) { return fmt::format("{}-{}", i, j); }

std::string R(double v) { return format_real(v); }
std::string I(long v) { return std::to_string(v); }

Vec2 scripted_position(const Vec2& center, double radius, double phase0, double omega, double t) {
  return center + radius * Vec2(std::cos(phase0 + omega * t), std::sin(phase0 + omega * t));
}

Topology make_topology(const ScenarioConfig& cfg, const std::vector<int>& ids) {
  if (cfg.comms.topology == "ring") return Topology::ring(ids);
  if (cfg.comms.topology == "edges") return Topology::from_edges(ids, cfg.comms.edges);
  return Topology::full(ids);
}

double phase_deg(const ScenarioConfig& cfg, int index) {
  const auto& phases = cfg.world.initial_phases_deg;
  if (!phases.empty()) return phases[static_cast<std::size_t>(index)];
  return 360.0 * index / cfg.world.n_agents;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto& wc = cfg.world;
  const int n = wc.n_agents;
  const double dt = wc.dt;
  const long steps = std::lround(wc.duration / dt);
  const bool scripted = cfg.controller.mode == AgentMode::scripted_circle;
  const ControllerGains gains = cfg.controller.gains(n, dt);
  const double rho = scripted ? cfg.controller.scripted_radius : gains.rho;
  const double scripted_omega = 2.0 * std::numbers::pi / cfg.controller.scripted_period;

  EstimatorConfig rel_cfg = cfg.relative.filter;
  rel_cfg.dt = dt;
  const Mat2 sigma_q = cfg.target_estimator.sigma_q;

  // Initial world.
  const MotionProfile profile = wc.target.profile();
  TargetState target{wc.target.initial_position, profile.velocity_at(0.0)};
  std::vector<AgentState> init;
  std::vector<double> phase0(static_cast<std::size_t>(n));
  const double orbit_omega = 2.0 * std::numbers::pi / cfg.controller.orbit_period;
  for (int i = 0; i < n; ++i) {
    const double phi = phase_deg(cfg, i) * std::numbers::pi / 180.0;
    phase0[static_cast<std::size_t>(i)] = phi;
    AgentState a;
    a.id = i + 1;
    const Vec2 c = target.p;
    if (scripted) {
      const double r = cfg.controller.scripted_radius;
      a.p = scripted_position(c, r, phi, scripted_omega, 0.0);
      a.v = (scripted_position(c, r, phi, scripted_omega, dt) - a.p) / dt;
    } else {
      const double r = wc.initial_radius;
      a.p = c + r * Vec2(std::cos(phi), std::sin(phi));
      a.v = target.v + orbit_omega * r * Vec2(-std::sin(phi), std::cos(phi));
    }
    const Vec2 to_target = c - a.p;
    a.psi = to_target.squaredNorm() > 0.0 ? std::atan2(to_target.y(), to_target.x()) : 0.0;
    init.push_back(a);
  }
  World world(init, target, profile, wc.obstacles, dt, WorldNoise{wc.agent_process_std, wc.target_process_std},
              cfg.seed);
  for (const auto& f : wc.failures) world.inject_failure(f.agent_id, f.t_fail);

  std::vector<int> ids;
  for (int i = 1; i <= n; ++i) ids.push_back(i);
  const Topology base_topology = make_topology(cfg, ids);
  Topology topology = base_topology;
  MessageBus bus(cfg.comms.policy, cfg.seed, cfg.comms.trace);

  std::map<int, AgentRuntime> agents;
  for (int id : ids) {
    AgentRuntime a;
    a.id = id;
    a.vio_rng = RngStream(cfg.seed, streams::kVio + static_cast<std::uint64_t>(id));
    a.camera_rng = RngStream(cfg.seed, streams::kCamera + static_cast<std::uint64_t>(id));
    a.dkf = TargetFilter(cfg.target_estimator, dt);
    agents.emplace(id, std::move(a));
  }

  const double dt_uwb = 1.0 / cfg.sensors.uwb_rate_hz;
  const UwbStreamState uwb_params = make_uwb_stream(cfg.sensors.uwb_beta, cfg.sensors.uwb_sigma_star, dt_uwb, dt);
  const long substeps = uwb_params.substeps_per_sample;
  std::map<std::pair<int, int>, UwbPair> uwb;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      UwbPair p;
      p.stream = UwbStream(uwb_params);
      p.rng = RngStream(cfg.seed, streams::kUwbPair + static_cast<std::uint64_t>((i - 1) * n + (j - 1)));
      uwb.emplace(std::make_pair(i, j), std::move(p));
    }
  }
  auto uwb_pair = [&uwb](int i, int j) -> UwbPair& { return uwb.at({std::min(i, j), std::max(i, j)}); };

  RunResult result;
  CsvTable world_log(logs::world_header());
  CsvTable rel_log(logs::relative_header());
  CsvTable target_log(logs::target_header());
  CsvTable ctrl_log(logs::controller_header());
  CsvTable uwb_log(logs::uwb_header());

  std::vector<Vec2> prev_pos(static_cast<std::size_t>(n));
  for (const auto& a : world.agents()) prev_pos[static_cast<std::size_t>(a.id - 1)] = a.p;

  for (long k = 0; k <= steps; ++k) {
    const double t = world.time();

    // (0) Failures take effect at the step boundary.
    const std::vector<int> failed = world.apply_due_failures();
    if (!failed.empty()) {
      topology = update_topology(base_topology, world.alive_ids());
      for (int id : failed) {
        agents.erase(id);
        for (auto& [_, a] : agents) {
          a.pairs.erase(id);
          a.phases.erase(id);
        }
        std::erase_if(uwb, [id](const auto& kv) { return kv.first.first == id || kv.first.second == id; });
      }
    }
    const TargetState& truth0 = world.target();

    world_log.add_row({I(k), R(t), "0", "1", R(truth0.p.x()), R(truth0.p.y()), R(truth0.v.x()), R(truth0.v.y()),
                       "nan"});
    for (const auto& a : world.agents()) {
      world_log.add_row({I(k), R(t), I(a.id), a.alive ? "1" : "0", R(a.p.x()), R(a.p.y()), R(a.v.x()), R(a.v.y()),
                         R(a.psi)});
    }

    // (1) Sensing.
    for (auto& [id, a] : agents) {
      const AgentState& s = world.agent(id);
      const Vec2 p_km1 = k == 0 ? s.p : prev_pos[static_cast<std::size_t>(id - 1)];
      a.vio = sense_vio(s.p, p_km1, s.psi, cfg.sensors.vio, a.vio_rng);
      a.los = line_of_sight(s.p, truth0.p, world.obstacles());
      a.q.reset();
      if (auto px = sense_stereo(s, truth0, cfg.sensors.camera, world.obstacles(), &a.camera_rng)) {
        if (px->depth > 0.0) a.q = backproject(*px, a.vio.psi, cfg.sensors.camera).q;
      }
    }
    for (auto& [key, pair] : uwb) {
      const auto [i, j] = key;
      const Vec2 pi_k = world.agent(i).p, pj_k = world.agent(j).p;
      const Vec2 pi_km1 = prev_pos[static_cast<std::size_t>(i - 1)], pj_km1 = prev_pos[static_cast<std::size_t>(j - 1)];
      const long first = k == 0 ? 0 : (k - 1) * substeps + 1;
      const long last = k * substeps;
      for (long m = first; m <= last; ++m) {
        const double frac = k == 0 ? 1.0 : static_cast<double>(m - (k - 1) * substeps) / static_cast<double>(substeps);
        const Vec2 pi = pi_km1 + frac * (pi_k - pi_km1);
        const Vec2 pj = pj_km1 + frac * (pj_k - pj_km1);
        const UwbSample raw = sense_uwb_raw(pi, pj, cfg.sensors.uwb, pair.rng);
        const UwbStream::Output out = pair.stream.push(m, raw.range);
        if (out.emitted) {
          pair.d_km1 = pair.d_k;
          pair.d_k = *out.emitted;
        }
        if (cfg.output.log_uwb) {
          uwb_log.add_row({I(k), I(m), pair_name(i, j), R(raw.range), raw.outlier ? "1" : "0", R(out.smoothed),
                           out.held ? "1" : "0", out.emitted ? "1" : "0"});
        }
      }
    }

    // (2) Target filter prediction, so that this step's prior can be shared.
    for (auto& [id, a] : agents) a.dkf.predict(a.u_prev);

    // (3) Exchange.
    std::vector<Message> outbox;
    for (const auto& [id, a] : agents) {
      if (k >= 1) {
        outbox.push_back({id, kBroadcast, k, DisplacementPayload{a.vio.delta, a.vio.psi}});
        outbox.push_back({id, kBroadcast, k, ControlPayload{a.u_prev}});
      }
      NeighborPacket pkt;
      pkt.sender = id;
      pkt.step = k;
      pkt.q = a.q;
      pkt.sigma_q = sigma_q;
      if (a.dkf.initialized()) {
        pkt.x_bar = a.dkf.prior().x;
        pkt.P_minus = a.dkf.prior().P;
      }
      outbox.push_back({id, kBroadcast, k, pkt});
      if (a.theta) outbox.push_back({id, kBroadcast, k, PhasePayload{*a.theta}});
    }
    Inboxes inboxes = bus.exchange(k, outbox, topology);
    std::map<int, std::map<int, Received>> received;
    for (const auto& [id, a] : agents) {
      received[id] = index_inbox(inboxes[id], k, cfg.target_estimator.max_prior_staleness);
    }

    // (4) Relative estimators.
    for (auto& [id, a] : agents) {
      const AgentState& si = world.agent(id);
      for (int j : topology.neighbors(id)) {
        auto it = a.pairs.find(j);
        if (it == a.pairs.end()) {
          RelativeEstimate init = rel_cfg.initial_estimate();
          RlsEstimator rls(cfg.relative.rls_forgetting, cfg.relative.rls_initial_gain);
          if (cfg.relative.init == "approximate") {
            RngStream rng(cfg.seed, streams::kRelativeInit + static_cast<std::uint64_t>((id - 1) * n + (j - 1)));
            const double s = cfg.relative.init_position_std;
            const Vec2 guess = si.p - world.agent(j).p + Vec2(rng.gaussian(s), rng.gaussian(s));
            init.x.head<2>() = guess;
            rls.reset_position(guess);
          }
          it = a.pairs.emplace(j, PairState{init, init, rls, 0, Vec2::Zero()}).first;
        }
        PairState& ps = it->second;
        const Received& rj = received[id][j];
        const UwbPair& up = uwb_pair(id, j);
        if (rj.control) ps.last_u_j = rj.control->u;
        if (k >= 1) {
          const Vec2 u_ij = a.u_prev - ps.last_u_j;
          if (rj.displacement && rj.control && up.d_k && up.d_km1) {
            PairStepInputs in;
            in.d_k = *up.d_k;
            in.d_km1 = *up.d_km1;
            in.delta_ij = relative_displacement(a.vio.delta, rj.displacement->delta);
            in.u_ij_km1 = u_ij;
            in.k = ++ps.updates;
            try {
              ps.modified = step_modified_kf(ps.modified, in, rel_cfg);
            } catch (const Error& e) {
              result.events.push_back({k, id, fmt::format("modified KF {}: {}", pair_name(id, j), e.what())});
              ps.modified = predict(ps.modified, u_ij, rel_cfg);
            }
            try {
              ps.classical = step_classical_kf(ps.classical, in, rel_cfg);
            } catch (const Error& e) {
              result.events.push_back({k, id, fmt::format("classical KF {}: {}", pair_name(id, j), e.what())});
              ps.classical = predict(ps.classical, u_ij, rel_cfg);
            }
            ps.rls.step(in, dt);
          } else {
            ps.modified = predict(ps.modified, u_ij, rel_cfg);
            ps.classical = predict(ps.classical, u_ij, rel_cfg);
          }
        }
        const Vec2 p_true = si.p - world.agent(j).p;
        const std::string pair = pair_name(id, j);
        auto row = [&](const char* kind, const Vec2& p, const Vec2& v, double trace) {
          rel_log.add_row({I(k), R(t), I(id), I(j), pair, kind, R(p.x()), R(p.y()), R(v.x()), R(v.y()),
                           R(p_true.x()), R(p_true.y()), R((p - p_true).norm()), R(trace)});
        };
        row(kKinds[0], ps.modified.position(), ps.modified.velocity(), ps.modified.P.trace());
        row(kKinds[1], ps.classical.position(), ps.classical.velocity(), ps.classical.P.trace());
        row(kKinds[2], ps.rls.position(), ps.rls.velocity(), ps.rls.gain_matrix().trace());
      }
    }

    // (5) Target estimators.
    for (auto& [id, a] : agents) {
      std::optional<DirectMeasurement> own;
      if (a.q) own = DirectMeasurement{*a.q, sigma_q};
      std::vector<NeighborInput> neighbors;
      for (const auto& [j, r] : received[id]) {
        auto ps = a.pairs.find(j);
        if (r.packet && ps != a.pairs.end()) neighbors.push_back({*r.packet, ps->second.modified});
      }
      const FusedMeasurement fused = fuse_event_triggered(own, neighbors);
      FusionMode mode = fused.mode;
      try {
        mode = a.dkf.update(own, neighbors);
      } catch (const Error& e) {
        result.events.push_back({k, id, fmt::format("target filter: {}", e.what())});
      }
      const Vec2 p_true = world.agent(id).p - truth0.p;
      const double e_m = mode == FusionMode::none ? std::nan("") : (fused.z - p_true).norm();
      if (a.dkf.initialized()) {
        const TargetEstimate& est = a.dkf.estimate();
        target_log.add_row({I(k), R(t), I(id), std::string(to_string(mode)), a.los ? "1" : "0", R(e_m),
                            R((est.position() - p_true).norm()), R(est.position().x()), R(est.position().y()),
                            R(p_true.x()), R(p_true.y()), R(est.P.trace())});
      } else {
        target_log.add_row({I(k), R(t), I(id), std::string(to_string(mode)), a.los ? "1" : "0", R(e_m), "nan", "nan",
                            "nan", R(p_true.x()), R(p_true.y()), "nan"});
      }
    }

    // (6) Oscillators and control.
    std::vector<Vec2> u_cmd(static_cast<std::size_t>(n), Vec2::Zero());
    std::vector<double> yaw_cmd(static_cast<std::size_t>(n), 0.0);
    for (auto& [id, a] : agents) {
      const AgentState& s = world.agent(id);
      const std::size_t idx = static_cast<std::size_t>(id - 1);
      const bool have_target = a.dkf.initialized();
      const Vec2 p_hat = have_target ? a.dkf.estimate().position() : Vec2(NAN, NAN);
      Vec2 u = Vec2::Zero();
      Vec2 u_raw = Vec2::Zero();
      Vec2 p_star(NAN, NAN);
      double theta_log = NAN;

      if (scripted) {
        const double c = scripted_omega;
        const double r = cfg.controller.scripted_radius;
        const Vec2 center = wc.target.initial_position;
        const Vec2 p_next = s.p + dt * s.v;
        const Vec2 p_ref2 = scripted_position(center, r, phase0[idx], c, t + 2.0 * dt);
        u = ((p_ref2 - p_next) / dt - s.v) / dt;
        u_raw = u;
        theta_log = wrap_two_pi(phase0[idx] + c * t);
        p_star = scripted_position(center, r, phase0[idx], c, t) - center;
      } else if (have_target) {
        if (!a.theta) a.theta = wrap_two_pi(std::atan2(p_hat.y(), p_hat.x()));
        std::vector<double> thetas{*a.theta};
        std::map<int, double> neighbor_theta;
        for (int j : topology.neighbors(id)) {
          const Received& rj = received[id][j];
          if (rj.phase) a.phases[j] = {rj.phase->theta, k};
          auto kp = a.phases.find(j);
          if (kp == a.phases.end()) continue;
          const double th = wrap_two_pi(kp->second.theta + gains.delta_theta * static_cast<double>(k - kp->second.step));
          neighbor_theta[j] = th;
          thetas.push_back(th);
        }
        const DesiredState d_i0 = desired_relative_state(*a.theta, gains, dt);
        FormationInputs in;
        in.desired_i0 = d_i0;
        in.target = RelativeTrackingTerm{p_hat, a.dkf.estimate().velocity(), d_i0};
        for (const auto& [j, th] : neighbor_theta) {
          auto ps = a.pairs.find(j);
          if (ps == a.pairs.end()) continue;
          const DesiredState d_ij = desired_inter_agent(d_i0, desired_relative_state(th, gains, dt));
          in.neighbors.push_back({ps->second.modified.position(), ps->second.modified.velocity(), d_ij});
        }
        const FormationOutput out = formation_control(in, gains, dt);
        u = out.u;
        u_raw = out.u1_raw + out.u2_raw + out.feedforward;
        p_star = d_i0.p;
        theta_log = *a.theta;
        a.theta = oscillator_step(*a.theta, thetas, gains, dt);
      }

      double yaw_rate = 0.0;
      double psi_hat = NAN;
      if (have_target) {
        psi_hat = desired_yaw(p_hat);
        if (auto yr = yaw_control(a.vio.psi, p_hat, gains.k_psi)) yaw_rate = *yr;
      }
      u_cmd[idx] = u;
      yaw_cmd[idx] = yaw_rate;
      a.u_prev = u;

      const double radius_true = (s.p - truth0.p).norm() - rho;
      const double radius_hat = have_target ? p_hat.norm() - rho : NAN;
      ctrl_log.add_row({I(k), R(t), I(id), R(theta_log), R(p_star.x()), R(p_star.y()), R(u_raw.x()), R(u_raw.y()),
                        R(u.x()), R(u.y()), R(s.psi), R(psi_hat), R(yaw_rate), R(radius_hat), R(radius_true)});
    }

    // (7) World step.
    for (const auto& a : world.agents()) prev_pos[static_cast<std::size_t>(a.id - 1)] = a.p;
    if (k < steps) world.step(u_cmd, yaw_cmd);
  }

  result.logs.emplace(logs::kWorld, std::move(world_log));
  result.logs.emplace(logs::kRelative, std::move(rel_log));
  result.logs.emplace(logs::kTarget, std::move(target_log));
  result.logs.emplace(logs::kController, std::move(ctrl_log));
  if (cfg.output.log_uwb) result.logs.emplace(logs::kUwb, std::move(uwb_log));
  if (cfg.comms.trace) {
    CsvTable trace(logs::comms_header());
    for (const auto& r : bus.trace()) {
      trace.add_row({I(r.step), I(r.sender), I(r.recipient), std::string(r.kind), r.delivered ? "1" : "0"});
    }
    result.logs.emplace(logs::kComms, std::move(trace));
  }
  result.comms = {bus.emitted(), bus.delivered(), bus.dropped(), bus.in_flight()};
  result.metrics = compute_metrics(result.logs, cfg.output.rmse_window_start);

  if (!cfg.output.dir.empty()) {
    write_logs(result.logs, cfg.output.dir);
    namespace fs = std::filesystem;
    std::ofstream(fs::path(cfg.output.dir) / "metrics.json") << metrics_to_json(result.metrics) << '\n';
    std::ofstream(fs::path(cfg.output.dir) / "config.toml") << to_toml(cfg);
  }
  return result;
}

EstimatorComparison compare_estimators(const ScenarioConfig& cfg, int trials) {
  if (trials < 1) throw Error(ErrorKind::configuration, "trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  EstimatorComparison c;
  for (int trial = 0; trial < trials; ++trial) {
    ScenarioConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(trial);
    run.output.dir.clear();
    run.output.log_uwb = false;
    run.comms.trace = false;
    const RunResult r = run_scenario(run);
    c.seeds.push_back(run.seed);
    for (const char* kind : kKinds) {
      auto it = r.metrics.relative_mean.find(kind);
      if (it == r.metrics.relative_mean.end()) {
        throw Error(ErrorKind::empty_window, "scenario produced no relative estimates");
      }
      c.per_trial[kind].push_back(it->second);
    }
  }
  for (const auto& [kind, v] : c.per_trial) {
    double sum = 0.0;
    for (double x : v) sum += x;
    c.mean[kind] = sum / static_cast<double>(v.size());
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

std::string comparison_to_json(const EstimatorComparison& c, int indent) {
  nlohmann::json j;
  j["trials"] = c.seeds.size();
  j["seeds"] = c.seeds;
  j["mean_rmse"] = c.mean;
  j["per_trial_rmse"] = c.per_trial;
  return j.dump(indent);
}

}  // namespace circnav
