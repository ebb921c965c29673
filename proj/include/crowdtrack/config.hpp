#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdtrack/dynamics.hpp"
#include "crowdtrack/simulators.hpp"

namespace crowdtrack {

/// Raised for parse failures and invalid/missing values. The message always
/// carries the offending location: "file:line" while parsing, "[section] key"
/// afterwards, so CLI users can go straight to the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sectioned key = value text. '#' and ';' start comments, keys may repeat
/// (scalar getters take the last occurrence, get_all returns every one in
/// file order).
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin = "<string>");

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section,
                         const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  /// Whitespace-separated list of numbers.
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;
  /// Every occurrence of a repeated key, each parsed as a number list.
  std::vector<std::vector<double>> get_all_doubles(
      const std::string& section, const std::string& key) const;

  /// Section names in first-appearance order.
  std::vector<std::string> sections() const;
  const std::string& origin() const { return origin_; }

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  const Section* find(const std::string& section) const;
  const std::string* find_value(const std::string& section,
                                const std::string& key) const;

  std::string origin_;
  std::vector<Section> sections_;
};

enum class ScenarioKind { rect, realistic };

/// A fully resolved scenario: exactly one of the two simulators, plus the
/// sensor both share.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::rect;
  RectScenario rect;
  RealisticScenario realistic;

  double Ts() const {
    return kind == ScenarioKind::rect ? rect.dynamics.Ts : realistic.Ts;
  }
  int steps() const {
    return kind == ScenarioKind::rect ? rect.steps() : realistic.steps();
  }
  const SensorParams& sensor() const {
    return kind == ScenarioKind::rect ? rect.sensor : realistic.sensor;
  }
};

ScenarioConfig scenario_from_config(const ConfigFile& cfg);
ScenarioConfig load_scenario(const std::string& path);

/// One tracking filter entry of an experiment ([filter:NAME] section).
struct FilterSpec {
  std::string name;
  std::string type;  // boxpf | cpf | sirpf
  int n_particles = 0;
  bool rates_known = true;
  bool cpf_resample_every_step = true;
};

/// Initial-knowledge box half-widths around the first true state.
struct PriorSpec {
  double pos_halfwidth = 50.0;
  double vel_halfwidth = 10.0;
  double extent_halfwidth = 30.0;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::string scenario_path;
  int n_mc = 100;
  std::uint64_t master_seed = 1;
  double lock_on_threshold = 20.0;  // m, position-RMSE lock-on level
  int divergence_window = 40;      // final steps inspected by the run rule
  std::string budget = "equal_particles";  // or equal_time
  int workers = 0;                 // 0: CROWDTRACK_WORKERS or 1
  PriorSpec prior;
  DynamicsParams filter_dynamics;  // model the filters run, not the truth
  std::vector<FilterSpec> filters;
};

ExperimentConfig experiment_from_config(const ConfigFile& cfg,
                                        const std::string& base_dir);
ExperimentConfig load_experiment(const std::string& path);

}  // namespace crowdtrack
