#pragma once

#include <array>
#include <vector>

#include "crowdtrack/box.hpp"
#include "crowdtrack/dynamics.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sensor.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

/// Rectangular-crowd scenario: correlated-velocity kinematics, random-walk
/// extents, Poisson crowd returns plus Poisson clutter in a disc about the
/// crowd centre (crowd rectangle excluded, density rho).
struct RectScenario {
  CrowdState initial{100.0, 0.0, 100.0, 0.0, 40.0, 40.0};
  DynamicsParams dynamics;
  SensorParams sensor;
  double lambda_T = 100.0;
  double rho = 0.01;            // 1/m^2, clutter spatial density
  double clutter_radius = 100.0;
  double T_tot = 40.0;

  int steps() const;
  void validate() const;
};

struct SimRun {
  std::vector<CrowdState> truth;        // one entry per step, k = 1..steps
  std::vector<MeasurementSet> scans;    // aligned with truth
};

/// Simulate the full scenario. The clutter rate per scan is
/// rho * (disc area - crowd rectangle area), re-evaluated at each step's
/// true extents.
SimRun rect_sim_run(const RectScenario& s, RandomSource& rng);

struct Pedestrian {
  Eigen::Vector2d pos{0.0, 0.0};
  Eigen::Vector2d vel{0.0, 0.0};
};

struct Corridor {
  std::vector<std::array<Eigen::Vector2d, 2>> walls;
  std::vector<Eigen::Vector2d> goals;
};

/// Two converging walls funnel into a 2 m gap at x = 165 feeding a straight
/// corridor; single goal at (250, 100). The narrow gap makes wall contact
/// (full stops) frequent during transit, which staggers the crowd into a
/// stretched column with stragglers — the congestion signature the realistic
/// scenario is built around.
Corridor default_corridor();

struct ForceParams {
  double k_goal = 1.0;      // m/s^2, constant pull toward the nearest goal
  double k_ped = 2.0;       // m/s^2 peak pairwise repulsion
  double d0 = 0.5;          // m, repulsion decay length
  double ped_cutoff = 5.0;  // m
  double wall_cutoff = 2.0; // m
  double speed_cap = 2.0;   // m/s
};

/// One symplectic-Euler step of the social-force dynamics. Walls are hard:
/// a move that would cross a segment is cancelled and the pedestrian stops.
void crowd_sim_step(std::vector<Pedestrian>& peds, const Corridor& corridor,
                    const ForceParams& f, double Ts);

/// Axis-aligned bounding rectangle of the pedestrians: centre, extent sides
/// clamped to the floor, velocities zero (the caller differentiates centres).
CrowdState crowd_truth_extract(const std::vector<Pedestrian>& peds,
                               double extent_floor = 0.1);

/// Noisy pedestrian returns plus Poisson clutter uniform in the disc about
/// the extracted crowd centre, shuffled.
MeasurementSet crowd_sim_measurements(const std::vector<Pedestrian>& peds,
                                      const SensorParams& sensor, double rho,
                                      double clutter_radius, RandomSource& rng,
                                      int k = 0);

/// Bottleneck scenario: pedestrians spawn uniformly in a rectangle and walk
/// toward the goal through the corridor.
struct RealisticScenario {
  int n_peds = 100;
  double T_tot = 150.0;
  double Ts = 0.125;
  double rho = 1e-3;
  double clutter_radius = 100.0;
  double extent_floor = 0.1;
  SensorParams sensor;
  ForceParams forces;
  Corridor corridor = default_corridor();
  // Fills the wide funnel entrance with >= 2 m clearance from the walls so
  // the whole crowd converges on the gap together.
  Box spawn{Interval{42.0, 70.0}, Interval{80.0, 120.0}};
  double gap_x = 165.0;  // transit marker: x coordinate of the bottleneck gap

  int steps() const;
  void validate() const;
};

/// Simulate pedestrians and extract the rectangle ground truth per step;
/// centre velocities are finite differences of consecutive centres.
SimRun realistic_sim_run(const RealisticScenario& s, RandomSource& rng);

}  // namespace crowdtrack
