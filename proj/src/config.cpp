#include "crowdtrack/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace crowdtrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(const std::string& section, const std::string& key,
                          const std::string& what) {
  throw ConfigError("[" + section + "] " + key + ": " + what);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) fail_at(section, key, "empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(section, key, "'" + s + "' is not a number");
  return v;
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = [&] { return origin + ":" + std::to_string(line_no); };
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where() + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where() + ": empty section name");
      current = nullptr;
      for (auto& s : cfg.sections_)
        if (s.name == name) current = &s;
      if (current == nullptr) {
        cfg.sections_.push_back({name, {}});
        current = &cfg.sections_.back();
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where() + ": expected 'key = value' or '[section]'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where() + ": empty key");
    if (current == nullptr)
      throw ConfigError(where() + ": key '" + key + "' before any [section]");
    current->entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

const ConfigFile::Section* ConfigFile::find(const std::string& section) const {
  for (const auto& s : sections_)
    if (s.name == section) return &s;
  return nullptr;
}

const std::string* ConfigFile::find_value(const std::string& section,
                                          const std::string& key) const {
  const Section* s = find(section);
  if (s == nullptr) return nullptr;
  const std::string* found = nullptr;
  for (const auto& [k, v] : s->entries)
    if (k == key) found = &v;
  return found;  // last occurrence wins for scalar reads
}

bool ConfigFile::has_section(const std::string& section) const {
  return find(section) != nullptr;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find_value(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  const std::string* v = find_value(section, key);
  if (v == nullptr) fail_at(section, key, "missing");
  return *v;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
  const std::string* v = find_value(section, key);
  return v != nullptr ? *v : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key) const {
  return parse_double(section, key, get_string(section, key));
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
  const std::string* v = find_value(section, key);
  return v != nullptr ? parse_double(section, key, *v) : fallback;
}

int ConfigFile::get_int(const std::string& section,
                        const std::string& key) const {
  const double v = get_double(section, key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    fail_at(section, key, "expected an integer");
  return i;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& section,
                                  const std::string& key,
                                  std::uint64_t fallback) const {
  const std::string* v = find_value(section, key);
  if (v == nullptr) return fallback;
  const std::string s = trim(*v);
  errno = 0;
  char* end = nullptr;
  const unsigned long long u = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(section, key, "'" + s + "' is not an unsigned integer");
  return u;
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key) const {
  const std::string raw = get_string(section, key);
  std::istringstream in(raw);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(section, key, tok));
  if (out.empty()) fail_at(section, key, "empty value");
  return out;
}

std::vector<std::vector<double>> ConfigFile::get_all_doubles(
    const std::string& section, const std::string& key) const {
  const Section* s = find(section);
  std::vector<std::vector<double>> out;
  if (s == nullptr) return out;
  for (const auto& [k, v] : s->entries) {
    if (k != key) continue;
    std::istringstream in(v);
    std::vector<double> row;
    std::string tok;
    while (in >> tok) row.push_back(parse_double(section, key, tok));
    if (row.empty()) fail_at(section, key, "empty value");
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  out.reserve(sections_.size());
  for (const auto& s : sections_) out.push_back(s.name);
  return out;
}

namespace {

DynamicsParams dynamics_from(const ConfigFile& cfg, const std::string& section,
                             const DynamicsParams& base) {
  DynamicsParams d = base;
  // The correlated-velocity model is configured by its time constant; the
  // mean-reversion coefficient is its reciprocal.
  if (cfg.has(section, "T_cv")) {
    const double t = cfg.get_double(section, "T_cv");
    if (!(t > 0.0)) fail_at(section, "T_cv", "must be > 0");
    d.alpha = 1.0 / t;
  }
  d.sigma_v = cfg.get_double(section, "sigma_v", d.sigma_v);
  d.sigma_theta = cfg.get_double(section, "sigma_theta", d.sigma_theta);
  d.Ts = cfg.get_double(section, "Ts", d.Ts);
  d.extent_floor = cfg.get_double(section, "extent_floor", d.extent_floor);
  return d;
}

SensorParams sensor_from(const ConfigFile& cfg) {
  SensorParams s;
  if (cfg.has("sensor", "sigma_z")) {
    const auto v = cfg.get_doubles("sensor", "sigma_z");
    if (v.size() == 1)
      s.sigma_z = Eigen::Vector2d{v[0], v[0]};
    else if (v.size() == 2)
      s.sigma_z = Eigen::Vector2d{v[0], v[1]};
    else
      fail_at("sensor", "sigma_z", "expected 1 or 2 numbers");
  }
  s.noise_bound_multiplier =
      cfg.get_double("sensor", "noise_bound_multiplier", s.noise_bound_multiplier);
  return s;
}

}  // namespace

ScenarioConfig scenario_from_config(const ConfigFile& cfg) {
  ScenarioConfig out;
  const std::string kind = cfg.get_string("scenario", "kind");
  if (kind == "rect") {
    out.kind = ScenarioKind::rect;
    RectScenario& r = out.rect;
    if (cfg.has("rect", "initial")) {
      const auto v = cfg.get_doubles("rect", "initial");
      if (v.size() != 6)
        fail_at("rect", "initial", "expected 6 numbers: x xdot y ydot a b");
      r.initial = CrowdState{v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    r.lambda_T = cfg.get_double("rect", "lambda_T", r.lambda_T);
    r.rho = cfg.get_double("rect", "rho", r.rho);
    r.clutter_radius = cfg.get_double("rect", "clutter_radius", r.clutter_radius);
    r.T_tot = cfg.get_double("rect", "T_tot", r.T_tot);
    r.dynamics = dynamics_from(cfg, "dynamics", r.dynamics);
    r.sensor = sensor_from(cfg);
    r.validate();
  } else if (kind == "realistic") {
    out.kind = ScenarioKind::realistic;
    RealisticScenario& r = out.realistic;
    r.n_peds = cfg.get_int("realistic", "n_peds", r.n_peds);
    r.T_tot = cfg.get_double("realistic", "T_tot", r.T_tot);
    r.Ts = cfg.get_double("realistic", "Ts", r.Ts);
    r.rho = cfg.get_double("realistic", "rho", r.rho);
    r.clutter_radius =
        cfg.get_double("realistic", "clutter_radius", r.clutter_radius);
    r.extent_floor = cfg.get_double("realistic", "extent_floor", r.extent_floor);
    r.gap_x = cfg.get_double("realistic", "gap_x", r.gap_x);
    if (cfg.has("realistic", "spawn")) {
      const auto v = cfg.get_doubles("realistic", "spawn");
      if (v.size() != 4)
        fail_at("realistic", "spawn", "expected 4 numbers: xlo xhi ylo yhi");
      r.spawn = Box{Interval{v[0], v[1]}, Interval{v[2], v[3]}};
    }
    if (cfg.has_section("forces")) {
      ForceParams& f = r.forces;
      f.k_goal = cfg.get_double("forces", "k_goal", f.k_goal);
      f.k_ped = cfg.get_double("forces", "k_ped", f.k_ped);
      f.d0 = cfg.get_double("forces", "d0", f.d0);
      f.ped_cutoff = cfg.get_double("forces", "ped_cutoff", f.ped_cutoff);
      f.wall_cutoff = cfg.get_double("forces", "wall_cutoff", f.wall_cutoff);
      f.speed_cap = cfg.get_double("forces", "speed_cap", f.speed_cap);
    }
    if (cfg.has_section("corridor")) {
      Corridor c;
      for (const auto& w : cfg.get_all_doubles("corridor", "wall")) {
        if (w.size() != 4)
          fail_at("corridor", "wall", "expected 4 numbers: x0 y0 x1 y1");
        c.walls.push_back(
            {Eigen::Vector2d{w[0], w[1]}, Eigen::Vector2d{w[2], w[3]}});
      }
      for (const auto& g : cfg.get_all_doubles("corridor", "goal")) {
        if (g.size() != 2) fail_at("corridor", "goal", "expected 2 numbers");
        c.goals.push_back(Eigen::Vector2d{g[0], g[1]});
      }
      r.corridor = std::move(c);
    }
    r.sensor = sensor_from(cfg);
    r.validate();
  } else {
    fail_at("scenario", "kind", "'" + kind + "' (want rect or realistic)");
  }
  return out;
}

ScenarioConfig load_scenario(const std::string& path) {
  return scenario_from_config(ConfigFile::parse_file(path));
}

ExperimentConfig experiment_from_config(const ConfigFile& cfg,
                                        const std::string& base_dir) {
  ExperimentConfig out;
  const std::string rel = cfg.get_string("experiment", "scenario");
  std::filesystem::path p(rel);
  if (p.is_relative() && !base_dir.empty())
    p = std::filesystem::path(base_dir) / p;
  out.scenario_path = p.string();
  out.scenario = load_scenario(out.scenario_path);

  out.n_mc = cfg.get_int("experiment", "n_mc", out.n_mc);
  if (out.n_mc < 1) fail_at("experiment", "n_mc", "must be >= 1");
  out.master_seed = cfg.get_u64("experiment", "master_seed", out.master_seed);
  out.lock_on_threshold =
      cfg.get_double("experiment", "lock_on_threshold", out.lock_on_threshold);
  if (!(out.lock_on_threshold > 0.0))
    fail_at("experiment", "lock_on_threshold", "must be > 0");
  out.divergence_window =
      cfg.get_int("experiment", "divergence_window", out.divergence_window);
  if (out.divergence_window < 1)
    fail_at("experiment", "divergence_window", "must be >= 1");
  out.budget = cfg.get_string("experiment", "budget", out.budget);
  if (out.budget != "equal_particles" && out.budget != "equal_time")
    fail_at("experiment", "budget",
            "'" + out.budget + "' (want equal_particles or equal_time)");
  out.workers = cfg.get_int("experiment", "workers", 0);
  if (out.workers < 0) fail_at("experiment", "workers", "must be >= 0");

  out.prior.pos_halfwidth =
      cfg.get_double("prior", "pos_halfwidth", out.prior.pos_halfwidth);
  out.prior.vel_halfwidth =
      cfg.get_double("prior", "vel_halfwidth", out.prior.vel_halfwidth);
  out.prior.extent_halfwidth =
      cfg.get_double("prior", "extent_halfwidth", out.prior.extent_halfwidth);

  // Filters predict with the scenario dynamics unless the experiment
  // declares its own model (the realistic scenario has no truth-side
  // dynamics, so the fallback there is the plain default).
  const DynamicsParams base = out.scenario.kind == ScenarioKind::rect
                                  ? out.scenario.rect.dynamics
                                  : DynamicsParams{};
  out.filter_dynamics = cfg.has_section("filter_dynamics")
                            ? dynamics_from(cfg, "filter_dynamics", base)
                            : base;
  if (out.scenario.kind == ScenarioKind::realistic)
    out.filter_dynamics.Ts = out.scenario.realistic.Ts;
  out.filter_dynamics.validate();

  for (const auto& name : cfg.sections()) {
    if (name.rfind("filter:", 0) != 0) continue;
    FilterSpec spec;
    spec.name = name.substr(7);
    if (spec.name.empty()) fail_at(name, "", "empty filter name");
    spec.type = cfg.get_string(name, "type");
    if (spec.type != "boxpf" && spec.type != "cpf" && spec.type != "sirpf")
      fail_at(name, "type", "'" + spec.type + "' (want boxpf, cpf or sirpf)");
    spec.n_particles = cfg.get_int(name, "n_particles");
    if (spec.n_particles < 1) fail_at(name, "n_particles", "must be >= 1");
    const std::string rates = cfg.get_string(name, "rates", "known");
    if (rates != "known" && rates != "estimated")
      fail_at(name, "rates", "'" + rates + "' (want known or estimated)");
    spec.rates_known = rates == "known";
    if (spec.type == "sirpf" && !spec.rates_known)
      fail_at(name, "rates", "sirpf has no rate estimator; use known");
    const std::string res = cfg.get_string(name, "resample", "always");
    if (res != "always" && res != "ess")
      fail_at(name, "resample", "'" + res + "' (want always or ess)");
    spec.cpf_resample_every_step = res == "always";
    out.filters.push_back(std::move(spec));
  }
  if (out.filters.empty())
    throw ConfigError("experiment: no [filter:NAME] sections");
  return out;
}

ExperimentConfig load_experiment(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  return experiment_from_config(
      cfg, std::filesystem::path(path).parent_path().string());
}

}  // namespace crowdtrack
