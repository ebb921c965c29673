#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdtrack/config.hpp"
#include "crowdtrack/harness.hpp"

namespace {

using namespace crowdtrack;

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::uint64_t seed) {
  const ScenarioConfig scenario = load_scenario(scenario_path);
  RandomSource rng(seed);
  const SimRun sim = simulate_scenario(scenario, rng);
  std::filesystem::create_directories(out_dir);
  write_truth_csv(out_dir + "/truth.csv", sim);
  write_scans_csv(out_dir + "/scans.csv", sim);
  write_sim_json(out_dir + "/sim.json", sim);
  std::printf("simulated %zu steps -> %s\n", sim.truth.size(), out_dir.c_str());
  return 0;
}

int cmd_track(const std::string& scenario_path, const std::string& out_dir,
              const std::string& filter_type, const std::string& rates,
              int particles, const std::string& resample, std::uint64_t seed) {
  ExperimentConfig exp;
  exp.scenario = load_scenario(scenario_path);
  exp.scenario_path = scenario_path;
  exp.n_mc = 1;
  exp.master_seed = seed;
  exp.filter_dynamics = exp.scenario.kind == ScenarioKind::rect
                            ? exp.scenario.rect.dynamics
                            : DynamicsParams{};
  if (exp.scenario.kind == ScenarioKind::realistic)
    exp.filter_dynamics.Ts = exp.scenario.realistic.Ts;

  FilterSpec spec;
  spec.name = filter_type;
  spec.type = filter_type;
  spec.n_particles = particles > 0 ? particles
                                   : (filter_type == "boxpf" ? 16 : 1000);
  if (rates != "known" && rates != "estimated")
    throw ConfigError("--rates: '" + rates + "' (want known or estimated)");
  spec.rates_known = rates == "known";
  if (spec.type == "sirpf" && !spec.rates_known)
    throw ConfigError("--rates: sirpf has no rate estimator; use known");
  spec.cpf_resample_every_step = resample == "always";
  exp.filters = {spec};

  const RunRecord rec = run_one(exp, spec, 0);
  std::filesystem::create_directories(out_dir);
  const std::vector<RunRecord> records = {rec};
  write_runs_csv(out_dir + "/runs_" + spec.name + ".csv", records);
  write_runs_json(out_dir + "/runs_" + spec.name + ".json", records);
  const RmseTable rmse = compute_rmse(records);
  write_rmse_csv(out_dir + "/rmse_" + spec.name + ".csv", rmse);

  double tail_err = 0.0;
  const int w = std::min<int>(exp.divergence_window,
                              static_cast<int>(rec.steps.size()));
  for (int i = static_cast<int>(rec.steps.size()) - w;
       i < static_cast<int>(rec.steps.size()); ++i)
    tail_err += rec.steps[i].pos_error;
  std::printf("%s: %zu steps, %.3f s filter time, mean tail error %.2f m%s\n",
              spec.name.c_str(), rec.steps.size(), rec.wall_s,
              w > 0 ? tail_err / w : 0.0, rec.divergent ? " [divergent]" : "");
  return rec.divergent ? 3 : 0;
}

int cmd_benchmark(const std::string& exp_path, const std::string& out_dir) {
  const ExperimentConfig exp = load_experiment(exp_path);
  const ExperimentResult result = run_experiment(exp, out_dir);
  for (const auto& f : result.filters)
    std::printf(
        "%-16s N=%-6d lock-on=%-5d divergent=%d/%d mean %.3f s/run\n",
        f.spec.name.c_str(), f.spec.n_particles, f.lock_on,
        f.rmse.n_divergent, f.rmse.n_divergent + f.rmse.n_runs,
        f.timing.mean_s);
  if (result.universal_divergence) {
    std::fprintf(stderr, "error: at least one filter diverged in every run\n");
    return 3;
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs,
               const std::string& out_dir) {
  compare_report(dirs, out_dir);
  std::printf("wrote %s/compare.csv and %s/summary.csv\n", out_dir.c_str(),
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowd tracking simulators, filters and benchmarks"};
  app.require_subcommand(1);

  std::string scenario_path, exp_path, out_dir = "out";
  std::string filter_type, rates = "known", resample = "always";
  int particles = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> report_dirs;

  CLI::App* sim = app.add_subcommand("simulate", "generate truth and scans");
  sim->add_option("scenario", scenario_path, "scenario config file")
      ->required();
  sim->add_option("-o,--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "random seed");

  CLI::App* track = app.add_subcommand("track", "run one filter once");
  track->add_option("scenario", scenario_path, "scenario config file")
      ->required();
  track->add_option("--filter", filter_type, "boxpf | cpf | sirpf")
      ->required()
      ->check(CLI::IsMember({"boxpf", "cpf", "sirpf"}));
  track->add_option("--rates", rates, "known | estimated");
  track->add_option("--particles", particles, "particle count override");
  track->add_option("--resample", resample, "cpf resampling: always | ess")
      ->check(CLI::IsMember({"always", "ess"}));
  track->add_option("--seed", seed, "random seed");
  track->add_option("-o,--out", out_dir, "output directory");

  CLI::App* bench = app.add_subcommand("benchmark", "Monte Carlo comparison");
  bench->add_option("experiment", exp_path, "experiment config file")
      ->required();
  bench->add_option("-o,--out", out_dir, "output directory");

  CLI::App* report = app.add_subcommand("report", "compare benchmark outputs");
  report->add_option("dirs", report_dirs, "benchmark output directories")
      ->required();
  report->add_option("-o,--out", out_dir, "report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage problems count as config errors
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario_path, out_dir, seed);
    if (track->parsed())
      return cmd_track(scenario_path, out_dir, filter_type, rates, particles,
                       resample, seed);
    if (bench->parsed()) return cmd_benchmark(exp_path, out_dir);
    if (report->parsed()) return cmd_report(report_dirs, out_dir);
  } catch (const crowdtrack::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
