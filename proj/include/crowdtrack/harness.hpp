#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crowdtrack/config.hpp"
#include "crowdtrack/filter.hpp"
#include "crowdtrack/simulators.hpp"

namespace crowdtrack {

/// Everything recorded about one filter step of one Monte Carlo run.
struct StepRecord {
  int k = 0;
  CrowdState truth;
  CrowdState estimate;
  Box box = Box::empty(kStateDim);  // point box for point-particle filters
  double n_eff = 0.0;
  double lambda_T_hat = 0.0;
  double lambda_C_hat = 0.0;
  bool step_diverged = false;  // filter-internal degeneracy reset
  double pos_error = 0.0;      // Euclidean centre error, m
  double wall_s = 0.0;         // filter time for this step
};

struct RunRecord {
  int run_id = 0;
  std::uint64_t seed = 0;  // simulation stream seed for the run
  std::string filter_name;
  std::vector<StepRecord> steps;
  double wall_s = 0.0;     // total filter time (excludes simulation)
  bool divergent = false;  // run-level rule, see run_divergent()
};

/// Component order used everywhere downstream; "pos" is the 2-D centre error
/// norm and exists only in RMSE space.
inline constexpr std::array<const char*, 7> kRmseComponents = {
    "x", "xdot", "y", "ydot", "a", "b", "pos"};

/// Per-step, per-component RMSE across the non-divergent runs of one filter.
struct RmseTable {
  std::string filter_name;
  std::vector<int> ks;
  std::array<std::vector<double>, 7> rmse;  // indexed like kRmseComponents
  int n_runs = 0;       // runs the RMSE is computed over (non-divergent)
  int n_divergent = 0;  // runs excluded by the divergence rule
};

struct TimingRow {
  std::string filter_name;
  int n_particles = 0;
  double mean_s = 0.0;  // mean filter wall-clock per run
  double std_s = 0.0;
};

/// Initial-knowledge box centred on the first true state; extent lower edges
/// never drop below the floor.
Box tracking_prior(const CrowdState& truth0, const PriorSpec& prior,
                   double extent_floor);

/// Instantiate a filter for the experiment's scenario. For known-rate specs
/// the true rates are taken from the scenario (the realistic crowd rate is
/// one return per pedestrian per scan).
std::unique_ptr<Filter> make_filter(const FilterSpec& spec,
                                    const ExperimentConfig& exp,
                                    const Box& prior, RandomSource& rng);

SimRun simulate_scenario(const ScenarioConfig& scenario, RandomSource& rng);

/// A run is divergent when at least half of its final `window` steps sit
/// above the lock-on threshold: the filter failed to (re)acquire the crowd
/// by the end of the run.
bool run_divergent(const std::vector<StepRecord>& steps, double threshold,
                   int window);

/// Drive one filter over a simulated run and record everything.
RunRecord track_run(const SimRun& sim, Filter& filter, RandomSource& rng,
                    double lock_on_threshold, int divergence_window);

/// Simulate + track with the run's two derived random streams.
RunRecord run_one(const ExperimentConfig& exp, const FilterSpec& spec,
                  int run_id);

/// Componentwise RMSE over non-divergent runs. All runs must share one step
/// grid; entries are NaN when every run diverged.
RmseTable compute_rmse(const std::vector<RunRecord>& runs);

/// First step with position RMSE below the threshold, -1 if none.
int lock_on_step(const RmseTable& table, double threshold);

// Canonical CSV writers (%.12g; byte-stable for identical inputs) plus JSON
// mirrors of the same content.
void write_truth_csv(const std::string& path, const SimRun& sim);
void write_scans_csv(const std::string& path, const SimRun& sim);
void write_sim_json(const std::string& path, const SimRun& sim);
void write_runs_csv(const std::string& path,
                    const std::vector<RunRecord>& runs);
void write_runs_json(const std::string& path,
                     const std::vector<RunRecord>& runs);
void write_rmse_csv(const std::string& path, const RmseTable& table);
void write_rmse_json(const std::string& path, const RmseTable& table);
void write_timing_csv(const std::string& path,
                      const std::vector<TimingRow>& rows);

struct FilterOutcome {
  FilterSpec spec;          // n_particles reflects any budget calibration
  RmseTable rmse;
  TimingRow timing;
  int lock_on = -1;
};

struct ExperimentResult {
  std::vector<FilterOutcome> filters;
  bool universal_divergence = false;  // some filter lost every run
};

/// Run every [filter:NAME] over n_mc seeded runs (worker pool), write
/// runs_/rmse_ CSV+JSON per filter plus timing.csv and report.json into
/// out_dir. equal_time budgets are calibrated against the first box PF (or
/// first) filter spec with a one-run timing probe before the runs start.
ExperimentResult run_experiment(const ExperimentConfig& exp,
                                const std::string& out_dir);

/// Align the rmse_*.csv tables found in the given output directories and
/// write compare.csv (per-step position RMSE side by side) and summary.csv
/// (lock-on, divergence and timing per filter) into report_dir.
/// Throws ConfigError when the directories' step grids differ.
void compare_report(const std::vector<std::string>& dirs,
                    const std::string& report_dir);

}  // namespace crowdtrack
