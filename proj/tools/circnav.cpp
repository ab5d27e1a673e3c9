#include "circnav/config.hpp"
#include "circnav/error.hpp"
#include "circnav/logs.hpp"
#include "circnav/metrics.hpp"
#include "circnav/runner.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using circnav::ScenarioConfig;

struct Common {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> duration;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* cfg = cmd->add_option("--config", c.config, "TOML scenario file");
  cmd->add_option("--scenario", c.scenario, "builtin scenario name")->excludes(cfg);
  cmd->add_option("--seed", c.seed, "override the scenario seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--duration", c.duration, "override the simulated duration (s)");
}

ScenarioConfig resolve(const Common& c, const std::string& default_scenario) {
  ScenarioConfig cfg;
  if (!c.config.empty()) {
    cfg = circnav::load_config(c.config);
  } else {
    cfg = circnav::builtin_scenario(c.scenario.empty() ? default_scenario : c.scenario);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.duration) cfg.world.duration = *c.duration;
  cfg.output.dir = c.out;
  cfg.validate();
  return cfg;
}

int fail(const nlohmann::json& body, int code) {
  std::cerr << body.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative circumnavigation simulator"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "run one scenario and write logs");
  add_common(run, run_opts);

  Common cmp_opts;
  int trials = 10;
  auto* cmp = app.add_subcommand("compare-estimators", "RMSE of the relative estimators over seeded trials");
  add_common(cmp, cmp_opts);
  cmp->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);

  std::string run_dir;
  std::string metrics_out;
  std::optional<double> window;
  auto* met = app.add_subcommand("metrics", "recompute metrics from a run directory");
  met->add_option("run_dir", run_dir, "directory written by `run`")->required();
  met->add_option("--out", metrics_out, "write metrics.json into this directory");
  met->add_option("--window", window, "RMSE window start (s); defaults to the run's config");

  auto* list = app.add_subcommand("list-scenarios", "list builtin scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ScenarioConfig cfg = resolve(run_opts, "indoor-pair");
      const circnav::RunResult r = circnav::run_scenario(cfg);
      std::cout << circnav::metrics_to_json(r.metrics) << '\n';
      for (const auto& e : r.events) std::cerr << "step " << e.k << " agent " << e.agent << ": " << e.what << '\n';
    } else if (*cmp) {
      const ScenarioConfig cfg = resolve(cmp_opts, "indoor-pair");
      ScenarioConfig quiet = cfg;
      quiet.output.dir.clear();
      const circnav::EstimatorComparison c = circnav::compare_estimators(quiet, trials);
      const std::string json = circnav::comparison_to_json(c);
      std::cout << json << '\n';
      if (!cfg.output.dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.output.dir);
        circnav::CsvTable table({"trial", "seed", "modified", "classical", "rls"});
        for (std::size_t i = 0; i < c.seeds.size(); ++i) {
          table.add_row({std::to_string(i), std::to_string(c.seeds[i]),
                         circnav::format_real(c.per_trial.at("modified")[i]),
                         circnav::format_real(c.per_trial.at("classical")[i]),
                         circnav::format_real(c.per_trial.at("rls")[i])});
        }
        circnav::write_logs({{"estimators.csv", table}}, cfg.output.dir);
        std::ofstream(fs::path(cfg.output.dir) / "estimators.json") << json << '\n';
      }
    } else if (*met) {
      namespace fs = std::filesystem;
      if (!fs::is_directory(run_dir)) {
        return fail({{"error", "configuration"}, {"message", "not a directory: " + run_dir}}, 2);
      }
      double start = 20.0;
      if (window) {
        start = *window;
      } else if (fs::exists(fs::path(run_dir) / "config.toml")) {
        start = circnav::load_config((fs::path(run_dir) / "config.toml").string()).output.rmse_window_start;
      }
      const circnav::RunMetrics m = circnav::compute_metrics(circnav::read_logs(run_dir), start);
      const std::string json = circnav::metrics_to_json(m);
      std::cout << json << '\n';
      if (!metrics_out.empty()) {
        fs::create_directories(metrics_out);
        std::ofstream(fs::path(metrics_out) / "metrics.json") << json << '\n';
      }
    } else if (*list) {
      for (const auto& name : circnav::builtin_scenario_names()) {
        std::cout << name << '\t' << circnav::builtin_scenario_description(name) << '\n';
      }
    }
  } catch (const circnav::ConfigError& e) {
    nlohmann::json issues = nlohmann::json::array();
    for (const auto& i : e.issues()) issues.push_back({{"field", i.field}, {"message", i.message}});
    return fail({{"error", "configuration"}, {"issues", issues}}, 2);
  } catch (const circnav::Error& e) {
    const int code = e.kind() == circnav::ErrorKind::schema || e.kind() == circnav::ErrorKind::empty_window ? 3
                     : e.kind() == circnav::ErrorKind::configuration                                      ? 2
                                                                                                          : 1;
    return fail({{"error", std::string(circnav::to_string(e.kind()))}, {"message", e.what()}}, code);
  } catch (const std::exception& e) {
    return fail({{"error", "internal"}, {"message", e.what()}}, 1);
  }
  return 0;
}
