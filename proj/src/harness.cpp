#include "crowdtrack/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "crowdtrack/box_pf.hpp"
#include "crowdtrack/conv_pf.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sir_pf.hpp"

namespace crowdtrack {

namespace {

constexpr double kPi = 3.14159265358979323846;

using json = nlohmann::json;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// RAII FILE* with the %.12g convention shared by every CSV artifact.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "w")) {
    if (f_ == nullptr)
      throw std::runtime_error(path + ": cannot open for writing");
  }
  ~CsvWriter() {
    if (f_ != nullptr) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void raw(const char* s) { std::fputs(s, f_); }
  void str(const std::string& s) { std::fputs(s.c_str(), f_); }
  void num(double v) { std::fprintf(f_, "%.12g", v); }
  void num(int v) { std::fprintf(f_, "%d", v); }
  void num(std::uint64_t v) {
    std::fprintf(f_, "%llu", static_cast<unsigned long long>(v));
  }
  void sep() { std::fputc(',', f_); }
  void end() { std::fputc('\n', f_); }

 private:
  std::FILE* f_;
};

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(1, ' ') << '\n';
}

double scenario_lambda_T(const ScenarioConfig& s) {
  // The realistic simulator returns one measurement per pedestrian per scan.
  return s.kind == ScenarioKind::rect ? s.rect.lambda_T
                                      : static_cast<double>(s.realistic.n_peds);
}

double scenario_rho(const ScenarioConfig& s) {
  return s.kind == ScenarioKind::rect ? s.rect.rho : s.realistic.rho;
}

double scenario_clutter_area(const ScenarioConfig& s) {
  const double r = s.kind == ScenarioKind::rect ? s.rect.clutter_radius
                                                : s.realistic.clutter_radius;
  return kPi * r * r;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Box tracking_prior(const CrowdState& truth0, const PriorSpec& prior,
                   double extent_floor) {
  const double p = prior.pos_halfwidth;
  const double v = prior.vel_halfwidth;
  const double e = prior.extent_halfwidth;
  return Box{
      Interval{truth0.x - p, truth0.x + p},
      Interval{truth0.x_dot - v, truth0.x_dot + v},
      Interval{truth0.y - p, truth0.y + p},
      Interval{truth0.y_dot - v, truth0.y_dot + v},
      Interval{std::max(truth0.a - e, extent_floor), truth0.a + e},
      Interval{std::max(truth0.b - e, extent_floor), truth0.b + e},
  };
}

std::unique_ptr<Filter> make_filter(const FilterSpec& spec,
                                    const ExperimentConfig& exp,
                                    const Box& prior, RandomSource& rng) {
  const ScenarioConfig& s = exp.scenario;
  const SensorParams& sensor = s.sensor();
  if (spec.type == "boxpf") {
    BoxPfConfig cfg;
    cfg.n_particles = spec.n_particles;
    cfg.rates_known = spec.rates_known;
    cfg.lambda_T_true = scenario_lambda_T(s);
    cfg.rho_true = scenario_rho(s);
    cfg.sensor_area = scenario_clutter_area(s);
    return std::make_unique<BoxParticleFilter>(prior, cfg, exp.filter_dynamics,
                                               sensor);
  }
  if (spec.type == "cpf") {
    CpfConfig cfg;
    cfg.n_particles = spec.n_particles;
    cfg.sensor_region_area = scenario_clutter_area(s);
    cfg.resample_every_step = spec.cpf_resample_every_step;
    return std::make_unique<ConvolutionParticleFilter>(
        prior, cfg, exp.filter_dynamics, sensor, rng);
  }
  if (spec.type == "sirpf") {
    SirConfig cfg;
    cfg.n_particles = spec.n_particles;
    cfg.lambda_T_true = scenario_lambda_T(s);
    cfg.rho_true = scenario_rho(s);
    return std::make_unique<SirParticleFilter>(prior, cfg, exp.filter_dynamics,
                                               sensor, rng);
  }
  throw ConfigError("[filter:" + spec.name + "] type: unknown '" + spec.type +
                    "'");
}

SimRun simulate_scenario(const ScenarioConfig& scenario, RandomSource& rng) {
  return scenario.kind == ScenarioKind::rect
             ? rect_sim_run(scenario.rect, rng)
             : realistic_sim_run(scenario.realistic, rng);
}

bool run_divergent(const std::vector<StepRecord>& steps, double threshold,
                   int window) {
  if (steps.empty()) return true;
  const int n = static_cast<int>(steps.size());
  const int w = std::min(window, n);
  int above = 0;
  for (int i = n - w; i < n; ++i) above += steps[i].pos_error > threshold;
  return 2 * above >= w;
}

RunRecord track_run(const SimRun& sim, Filter& filter, RandomSource& rng,
                    double lock_on_threshold, int divergence_window) {
  RunRecord rec;
  rec.steps.reserve(sim.scans.size());
  for (size_t i = 0; i < sim.scans.size(); ++i) {
    const double t0 = now_s();
    const FilterStepResult res = filter.step(sim.scans[i], rng);
    const double dt = now_s() - t0;
    StepRecord step;
    step.k = static_cast<int>(i) + 1;
    step.truth = sim.truth[i];
    step.estimate = res.estimate;
    step.box = res.box_estimate;
    step.n_eff = res.n_eff;
    step.lambda_T_hat = res.lambda_T_hat;
    step.lambda_C_hat = res.lambda_C_hat;
    step.step_diverged = res.diverged;
    step.pos_error = std::hypot(res.estimate.x - sim.truth[i].x,
                                res.estimate.y - sim.truth[i].y);
    step.wall_s = dt;
    rec.wall_s += dt;
    rec.steps.push_back(std::move(step));
  }
  rec.divergent = run_divergent(rec.steps, lock_on_threshold, divergence_window);
  return rec;
}

RunRecord run_one(const ExperimentConfig& exp, const FilterSpec& spec,
                  int run_id) {
  const std::uint64_t sim_seed =
      derive_seed(exp.master_seed, 2 * static_cast<std::uint64_t>(run_id));
  const std::uint64_t filter_seed =
      derive_seed(exp.master_seed, 2 * static_cast<std::uint64_t>(run_id) + 1);
  RandomSource sim_rng(sim_seed);
  RandomSource filter_rng(filter_seed);
  const SimRun sim = simulate_scenario(exp.scenario, sim_rng);
  const Box prior = tracking_prior(sim.truth.front(), exp.prior,
                                   exp.filter_dynamics.extent_floor);
  const std::unique_ptr<Filter> filter =
      make_filter(spec, exp, prior, filter_rng);
  RunRecord rec = track_run(sim, *filter, filter_rng, exp.lock_on_threshold,
                            exp.divergence_window);
  rec.run_id = run_id;
  rec.seed = sim_seed;
  rec.filter_name = spec.name;
  return rec;
}

RmseTable compute_rmse(const std::vector<RunRecord>& runs) {
  RmseTable table;
  if (runs.empty()) return table;
  table.filter_name = runs.front().filter_name;
  const size_t n_steps = runs.front().steps.size();
  for (const auto& r : runs) {
    if (r.steps.size() != n_steps)
      throw std::invalid_argument("compute_rmse: runs on different step grids");
    table.n_divergent += r.divergent;
  }
  table.n_runs = static_cast<int>(runs.size()) - table.n_divergent;
  table.ks.reserve(n_steps);
  for (size_t i = 0; i < n_steps; ++i)
    table.ks.push_back(runs.front().steps[i].k);
  for (auto& col : table.rmse) col.assign(n_steps, 0.0);
  for (const auto& r : runs) {
    if (r.divergent) continue;
    for (size_t i = 0; i < n_steps; ++i) {
      const auto et = r.steps[i].estimate.vec();
      const auto tt = r.steps[i].truth.vec();
      for (int c = 0; c < 6; ++c) {
        const double d = et[c] - tt[c];
        table.rmse[c][i] += d * d;
      }
      table.rmse[6][i] += r.steps[i].pos_error * r.steps[i].pos_error;
    }
  }
  for (auto& col : table.rmse)
    for (auto& v : col)
      v = table.n_runs > 0 ? std::sqrt(v / table.n_runs)
                           : std::numeric_limits<double>::quiet_NaN();
  return table;
}

int lock_on_step(const RmseTable& table, double threshold) {
  for (size_t i = 0; i < table.ks.size(); ++i)
    if (table.rmse[6][i] < threshold) return table.ks[i];
  return -1;
}

void write_truth_csv(const std::string& path, const SimRun& sim) {
  CsvWriter out(path);
  out.raw("k,x,xdot,y,ydot,a,b\n");
  for (size_t i = 0; i < sim.truth.size(); ++i) {
    out.num(static_cast<int>(i) + 1);
    const auto v = sim.truth[i].vec();
    for (int c = 0; c < 6; ++c) {
      out.sep();
      out.num(v[c]);
    }
    out.end();
  }
}

void write_scans_csv(const std::string& path, const SimRun& sim) {
  CsvWriter out(path);
  out.raw("k,z1,z2\n");
  for (size_t i = 0; i < sim.scans.size(); ++i) {
    for (const auto& z : sim.scans[i].points) {
      out.num(static_cast<int>(i) + 1);
      out.sep();
      out.num(z[0]);
      out.sep();
      out.num(z[1]);
      out.end();
    }
  }
}

void write_sim_json(const std::string& path, const SimRun& sim) {
  json truth = json::array();
  json scans = json::array();
  for (size_t i = 0; i < sim.truth.size(); ++i) {
    const auto v = sim.truth[i].vec();
    truth.push_back({{"k", i + 1},
                     {"x", v[0]},
                     {"xdot", v[1]},
                     {"y", v[2]},
                     {"ydot", v[3]},
                     {"a", v[4]},
                     {"b", v[5]}});
    json pts = json::array();
    for (const auto& z : sim.scans[i].points) pts.push_back({z[0], z[1]});
    scans.push_back({{"k", i + 1}, {"points", std::move(pts)}});
  }
  write_json_file(path,
                  {{"truth", std::move(truth)}, {"scans", std::move(scans)}});
}

void write_runs_csv(const std::string& path,
                    const std::vector<RunRecord>& runs) {
  CsvWriter out(path);
  out.raw("run,seed,k,component,truth,estimate,lo,hi\n");
  for (const auto& r : runs) {
    for (const auto& s : r.steps) {
      const auto tt = s.truth.vec();
      const auto et = s.estimate.vec();
      const bool boxed = s.box.dim() == kStateDim && !s.box.is_empty();
      for (int c = 0; c < 6; ++c) {
        out.num(r.run_id);
        out.sep();
        out.num(r.seed);
        out.sep();
        out.num(s.k);
        out.sep();
        out.str(kComponentNames[c]);
        out.sep();
        out.num(tt[c]);
        out.sep();
        out.num(et[c]);
        out.sep();
        out.num(boxed ? s.box[c].lo : et[c]);
        out.sep();
        out.num(boxed ? s.box[c].hi : et[c]);
        out.end();
      }
    }
  }
}

void write_runs_json(const std::string& path,
                     const std::vector<RunRecord>& runs) {
  json arr = json::array();
  for (const auto& r : runs) {
    json steps = json::array();
    for (const auto& s : r.steps) {
      const bool boxed = s.box.dim() == kStateDim && !s.box.is_empty();
      json lo = json::array(), hi = json::array();
      const auto et = s.estimate.vec();
      for (int c = 0; c < 6; ++c) {
        lo.push_back(boxed ? s.box[c].lo : et[c]);
        hi.push_back(boxed ? s.box[c].hi : et[c]);
      }
      json truth = json::array(), est = json::array();
      const auto tt = s.truth.vec();
      for (int c = 0; c < 6; ++c) {
        truth.push_back(tt[c]);
        est.push_back(et[c]);
      }
      steps.push_back({{"k", s.k},
                       {"truth", std::move(truth)},
                       {"estimate", std::move(est)},
                       {"lo", std::move(lo)},
                       {"hi", std::move(hi)},
                       {"n_eff", s.n_eff},
                       {"lambda_T_hat", s.lambda_T_hat},
                       {"lambda_C_hat", s.lambda_C_hat},
                       {"step_diverged", s.step_diverged},
                       {"pos_error", s.pos_error},
                       {"wall_s", s.wall_s}});
    }
    arr.push_back({{"run", r.run_id},
                   {"seed", r.seed},
                   {"filter", r.filter_name},
                   {"divergent", r.divergent},
                   {"wall_s", r.wall_s},
                   {"steps", std::move(steps)}});
  }
  write_json_file(path, arr);
}

void write_rmse_csv(const std::string& path, const RmseTable& table) {
  CsvWriter out(path);
  out.raw("k,component,rmse,n_runs,n_divergent\n");
  for (size_t i = 0; i < table.ks.size(); ++i) {
    for (size_t c = 0; c < kRmseComponents.size(); ++c) {
      out.num(table.ks[i]);
      out.sep();
      out.raw(kRmseComponents[c]);
      out.sep();
      out.num(table.rmse[c][i]);
      out.sep();
      out.num(table.n_runs);
      out.sep();
      out.num(table.n_divergent);
      out.end();
    }
  }
}

void write_rmse_json(const std::string& path, const RmseTable& table) {
  json by_component;
  for (size_t c = 0; c < kRmseComponents.size(); ++c)
    by_component[kRmseComponents[c]] = table.rmse[c];
  write_json_file(path, {{"filter", table.filter_name},
                         {"k", table.ks},
                         {"rmse", std::move(by_component)},
                         {"n_runs", table.n_runs},
                         {"n_divergent", table.n_divergent}});
}

void write_timing_csv(const std::string& path,
                      const std::vector<TimingRow>& rows) {
  CsvWriter out(path);
  out.raw("filter,n_particles,mean_s,std_s\n");
  for (const auto& r : rows) {
    out.str(r.filter_name);
    out.sep();
    out.num(r.n_particles);
    out.sep();
    out.num(r.mean_s);
    out.sep();
    out.num(r.std_s);
    out.end();
  }
}

namespace {

int resolve_workers(const ExperimentConfig& exp) {
  if (exp.workers > 0) return exp.workers;
  if (const char* env = std::getenv("CROWDTRACK_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

std::vector<RunRecord> run_all(const ExperimentConfig& exp,
                               const FilterSpec& spec, int workers) {
  std::vector<RunRecord> records(exp.n_mc);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  const auto worker = [&] {
    for (;;) {
      const int run_id = next.fetch_add(1);
      if (run_id >= exp.n_mc) return;
      try {
        records[run_id] = run_one(exp, spec, run_id);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return records;  // indexed by run id: already sorted
}

/// Wall-clock of one probe run (its record is discarded). The probe run id
/// sits past the Monte Carlo ids so its random streams collide with nothing.
double probe_run_seconds(const ExperimentConfig& exp, const FilterSpec& spec) {
  return run_one(exp, spec, exp.n_mc).wall_s;
}

std::vector<FilterSpec> calibrate_budget(const ExperimentConfig& exp) {
  std::vector<FilterSpec> specs = exp.filters;
  if (exp.budget != "equal_time" || specs.size() < 2) return specs;
  // Reference: the first box PF entry (the comparison baseline), else the
  // first filter.
  size_t ref = 0;
  for (size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].type == "boxpf") {
      ref = i;
      break;
    }
  }
  const double t_ref = probe_run_seconds(exp, specs[ref]);
  for (size_t i = 0; i < specs.size(); ++i) {
    if (i == ref) continue;
    const double t = probe_run_seconds(exp, specs[i]);
    if (!(t > 0.0) || !(t_ref > 0.0)) continue;
    // Per-run cost is close to linear in the particle count for all three
    // filters, so one proportional correction lands near the budget.
    const double scaled = specs[i].n_particles * (t_ref / t);
    specs[i].n_particles = std::max(4, static_cast<int>(std::lround(scaled)));
  }
  return specs;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& exp,
                                const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const int workers = resolve_workers(exp);
  const std::vector<FilterSpec> specs = calibrate_budget(exp);

  ExperimentResult result;
  std::vector<TimingRow> timing;
  json report_filters = json::array();
  for (const auto& spec : specs) {
    const std::vector<RunRecord> records = run_all(exp, spec, workers);
    FilterOutcome outcome;
    outcome.spec = spec;
    outcome.rmse = compute_rmse(records);
    outcome.lock_on = lock_on_step(outcome.rmse, exp.lock_on_threshold);

    TimingRow row;
    row.filter_name = spec.name;
    row.n_particles = spec.n_particles;
    for (const auto& r : records) row.mean_s += r.wall_s;
    row.mean_s /= records.size();
    for (const auto& r : records) {
      const double d = r.wall_s - row.mean_s;
      row.std_s += d * d;
    }
    row.std_s = records.size() > 1
                    ? std::sqrt(row.std_s / (records.size() - 1))
                    : 0.0;
    outcome.timing = row;
    timing.push_back(row);

    const std::string base = out_dir + "/";
    write_runs_csv(base + "runs_" + spec.name + ".csv", records);
    write_runs_json(base + "runs_" + spec.name + ".json", records);
    write_rmse_csv(base + "rmse_" + spec.name + ".csv", outcome.rmse);
    write_rmse_json(base + "rmse_" + spec.name + ".json", outcome.rmse);

    report_filters.push_back({{"name", spec.name},
                              {"type", spec.type},
                              {"rates", spec.rates_known ? "known" : "estimated"},
                              {"n_particles", spec.n_particles},
                              {"lock_on_step", outcome.lock_on},
                              {"n_runs", outcome.rmse.n_runs},
                              {"n_divergent", outcome.rmse.n_divergent},
                              {"mean_s", row.mean_s},
                              {"std_s", row.std_s}});
    if (outcome.rmse.n_runs == 0) result.universal_divergence = true;
    result.filters.push_back(std::move(outcome));
  }
  write_timing_csv(out_dir + "/timing.csv", timing);
  write_json_file(out_dir + "/report.json",
                  {{"scenario", exp.scenario_path},
                   {"kind", exp.scenario.kind == ScenarioKind::rect
                                ? "rect"
                                : "realistic"},
                   {"n_mc", exp.n_mc},
                   {"master_seed", exp.master_seed},
                   {"budget", exp.budget},
                   {"lock_on_threshold", exp.lock_on_threshold},
                   {"divergence_window", exp.divergence_window},
                   {"filters", std::move(report_filters)}});
  return result;
}

void compare_report(const std::vector<std::string>& dirs,
                    const std::string& report_dir) {
  namespace fs = std::filesystem;
  if (dirs.empty()) throw ConfigError("report: no input directories");

  struct Column {
    std::string label;
    std::vector<double> pos_rmse;
    json meta;  // filter entry from report.json
  };
  std::vector<Column> columns;
  std::vector<int> ks;

  for (const auto& dir : dirs) {
    const fs::path report_path = fs::path(dir) / "report.json";
    std::ifstream in(report_path);
    if (!in) throw ConfigError(report_path.string() + ": cannot open");
    json report;
    in >> report;
    const std::string base = fs::path(dir).filename().string();
    for (const auto& f : report.at("filters")) {
      const std::string name = f.at("name").get<std::string>();
      Column col;
      col.label = dirs.size() > 1 ? base + ":" + name : name;
      col.meta = f;

      const fs::path rmse_path = fs::path(dir) / ("rmse_" + name + ".csv");
      std::ifstream rmse_in(rmse_path);
      if (!rmse_in) throw ConfigError(rmse_path.string() + ": cannot open");
      std::string line;
      std::getline(rmse_in, line);  // header
      std::vector<int> col_ks;
      while (std::getline(rmse_in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5 || fields[1] != "pos") continue;
        col_ks.push_back(std::atoi(fields[0].c_str()));
        col.pos_rmse.push_back(std::atof(fields[2].c_str()));
      }
      if (ks.empty())
        ks = col_ks;
      else if (ks != col_ks)
        throw ConfigError("report: mismatched step grids between inputs");
      columns.push_back(std::move(col));
    }
  }

  fs::create_directories(report_dir);
  {
    CsvWriter out(report_dir + "/compare.csv");
    out.raw("k");
    for (const auto& c : columns) {
      out.sep();
      out.str(c.label);
    }
    out.end();
    for (size_t i = 0; i < ks.size(); ++i) {
      out.num(ks[i]);
      for (const auto& c : columns) {
        out.sep();
        out.num(c.pos_rmse[i]);
      }
      out.end();
    }
  }
  {
    CsvWriter out(report_dir + "/summary.csv");
    out.raw("label,lock_on_step,n_runs,n_divergent,n_particles,mean_s,std_s\n");
    for (const auto& c : columns) {
      out.str(c.label);
      out.sep();
      out.num(c.meta.at("lock_on_step").get<int>());
      out.sep();
      out.num(c.meta.at("n_runs").get<int>());
      out.sep();
      out.num(c.meta.at("n_divergent").get<int>());
      out.sep();
      out.num(c.meta.at("n_particles").get<int>());
      out.sep();
      out.num(c.meta.at("mean_s").get<double>());
      out.sep();
      out.num(c.meta.at("std_s").get<double>());
      out.end();
    }
  }
}

}  // namespace crowdtrack
