#include "crowdtrack/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdtrack {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Closest point on segment [a, b] to p.
Eigen::Vector2d closest_on_segment(const Eigen::Vector2d& a,
                                   const Eigen::Vector2d& b,
                                   const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

// Proper segment intersection test, counting touching as crossing so wall
// clamping errs on the safe side.
bool segments_cross(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                    const Eigen::Vector2d& q0, const Eigen::Vector2d& q1) {
  const auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                         const Eigen::Vector2d& c) {
    const double v = (b.x() - a.x()) * (c.y() - a.y()) -
                     (b.y() - a.y()) * (c.x() - a.x());
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
  };
  const int o1 = orient(p0, p1, q0), o2 = orient(p0, p1, q1);
  const int o3 = orient(q0, q1, p0), o4 = orient(q0, q1, p1);
  if (o1 != o2 && o3 != o4) return true;
  const auto on = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Vector2d& c) {
    return std::min(a.x(), b.x()) - 1e-12 <= c.x() &&
           c.x() <= std::max(a.x(), b.x()) + 1e-12 &&
           std::min(a.y(), b.y()) - 1e-12 <= c.y() &&
           c.y() <= std::max(a.y(), b.y()) + 1e-12;
  };
  if (o1 == 0 && on(p0, p1, q0)) return true;
  if (o2 == 0 && on(p0, p1, q1)) return true;
  if (o3 == 0 && on(q0, q1, p0)) return true;
  if (o4 == 0 && on(q0, q1, p1)) return true;
  return false;
}

}  // namespace

int RectScenario::steps() const {
  return static_cast<int>(std::lround(T_tot / dynamics.Ts));
}

void RectScenario::validate() const {
  dynamics.validate();
  sensor.validate();
  if (lambda_T < 0.0) throw std::invalid_argument("rect.lambda_T must be >= 0");
  if (rho < 0.0) throw std::invalid_argument("rect.rho must be >= 0");
  if (!(clutter_radius > 0.0))
    throw std::invalid_argument("rect.clutter_radius must be > 0");
  if (steps() < 1) throw std::invalid_argument("rect.T_tot too small");
}

SimRun rect_sim_run(const RectScenario& s, RandomSource& rng) {
  s.validate();
  const int n = s.steps();
  const double disc_area = kPi * s.clutter_radius * s.clutter_radius;
  SimRun run;
  run.truth.reserve(n);
  run.scans.reserve(n);
  CrowdState state = s.initial;
  for (int k = 1; k <= n; ++k) {
    state = step_truth(state, s.dynamics, rng);
    const double lambda_c =
        s.rho * std::max(disc_area - state.a * state.b, 0.0);
    run.truth.push_back(state);
    run.scans.push_back(generate_measurements(state, s.lambda_T, lambda_c,
                                              s.sensor, s.clutter_radius, rng,
                                              k));
  }
  return run;
}

Corridor default_corridor() {
  Corridor c;
  c.walls = {
      {Eigen::Vector2d{40.0, 130.0}, Eigen::Vector2d{165.0, 101.0}},
      {Eigen::Vector2d{40.0, 70.0}, Eigen::Vector2d{165.0, 99.0}},
      {Eigen::Vector2d{165.0, 101.0}, Eigen::Vector2d{260.0, 101.0}},
      {Eigen::Vector2d{165.0, 99.0}, Eigen::Vector2d{260.0, 99.0}},
  };
  c.goals = {Eigen::Vector2d{250.0, 100.0}};
  return c;
}

void crowd_sim_step(std::vector<Pedestrian>& peds, const Corridor& corridor,
                    const ForceParams& f, double Ts) {
  const int n = static_cast<int>(peds.size());
  std::vector<Eigen::Vector2d> accel(n, Eigen::Vector2d::Zero());

  for (int i = 0; i < n; ++i) {
    // Constant-magnitude pull toward the nearest goal.
    if (!corridor.goals.empty()) {
      double best = std::numeric_limits<double>::infinity();
      Eigen::Vector2d dir = Eigen::Vector2d::Zero();
      for (const auto& g : corridor.goals) {
        const Eigen::Vector2d d = g - peds[i].pos;
        const double dist = d.norm();
        if (dist < best) {
          best = dist;
          dir = dist > 1e-9 ? Eigen::Vector2d(d / dist) : Eigen::Vector2d::Zero();
        }
      }
      accel[i] += f.k_goal * dir;
    }
    // Wall repulsion from the closest point of each nearby segment.
    for (const auto& w : corridor.walls) {
      const Eigen::Vector2d cp = closest_on_segment(w[0], w[1], peds[i].pos);
      const Eigen::Vector2d d = peds[i].pos - cp;
      const double dist = d.norm();
      if (dist < f.wall_cutoff && dist > 1e-9)
        accel[i] += f.k_ped * std::exp(-dist / f.d0) * (d / dist);
    }
  }
  // Symmetric pairwise repulsion within the cutoff.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector2d d = peds[i].pos - peds[j].pos;
      const double dist = d.norm();
      if (dist >= f.ped_cutoff || dist <= 1e-9) continue;
      const Eigen::Vector2d push = f.k_ped * std::exp(-dist / f.d0) * (d / dist);
      accel[i] += push;
      accel[j] -= push;
    }
  }

  for (int i = 0; i < n; ++i) {
    Pedestrian& p = peds[i];
    p.vel += Ts * accel[i];
    const double speed = p.vel.norm();
    if (speed > f.speed_cap) p.vel *= f.speed_cap / speed;
    const Eigen::Vector2d proposed = p.pos + Ts * p.vel;
    bool blocked = false;
    for (const auto& w : corridor.walls) {
      if (segments_cross(p.pos, proposed, w[0], w[1])) {
        blocked = true;
        break;
      }
    }
    if (blocked) {
      p.vel.setZero();
    } else {
      p.pos = proposed;
    }
  }
}

CrowdState crowd_truth_extract(const std::vector<Pedestrian>& peds,
                               double extent_floor) {
  if (peds.empty())
    throw std::invalid_argument("crowd_truth_extract: no pedestrians");
  double lo_x = peds[0].pos.x(), hi_x = lo_x;
  double lo_y = peds[0].pos.y(), hi_y = lo_y;
  for (const auto& p : peds) {
    lo_x = std::min(lo_x, p.pos.x());
    hi_x = std::max(hi_x, p.pos.x());
    lo_y = std::min(lo_y, p.pos.y());
    hi_y = std::max(hi_y, p.pos.y());
  }
  CrowdState s;
  s.x = 0.5 * (lo_x + hi_x);
  s.y = 0.5 * (lo_y + hi_y);
  s.a = std::max(hi_x - lo_x, extent_floor);
  s.b = std::max(hi_y - lo_y, extent_floor);
  return s;
}

MeasurementSet crowd_sim_measurements(const std::vector<Pedestrian>& peds,
                                      const SensorParams& sensor, double rho,
                                      double clutter_radius, RandomSource& rng,
                                      int k) {
  const CrowdState centre = crowd_truth_extract(peds);
  MeasurementSet scan;
  scan.k = k;
  for (const auto& p : peds) {
    scan.points.push_back(Eigen::Vector2d{
        p.pos.x() + rng.normal(0.0, sensor.sigma_z.x()),
        p.pos.y() + rng.normal(0.0, sensor.sigma_z.y())});
  }
  const double disc_area = kPi * clutter_radius * clutter_radius;
  const int n_clutter = rng.poisson(rho * disc_area);
  for (int i = 0; i < n_clutter; ++i) {
    // Uniform in the disc by rejection from the bounding square.
    for (;;) {
      const double dx = rng.uniform(-clutter_radius, clutter_radius);
      const double dy = rng.uniform(-clutter_radius, clutter_radius);
      if (dx * dx + dy * dy > clutter_radius * clutter_radius) continue;
      scan.points.push_back(Eigen::Vector2d{centre.x + dx, centre.y + dy});
      break;
    }
  }
  // Fisher-Yates with the run's random source keeps origin unrecoverable.
  for (int i = static_cast<int>(scan.points.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(scan.points[i], scan.points[std::min(j, i)]);
  }
  scan.boxes.reserve(scan.points.size());
  for (const auto& z : scan.points)
    scan.boxes.push_back(measurement_box(z, sensor));
  return scan;
}

int RealisticScenario::steps() const {
  return static_cast<int>(std::lround(T_tot / Ts));
}

void RealisticScenario::validate() const {
  sensor.validate();
  if (n_peds < 1) throw std::invalid_argument("realistic.n_peds must be >= 1");
  if (!(Ts > 0.0)) throw std::invalid_argument("realistic.Ts must be > 0");
  if (rho < 0.0) throw std::invalid_argument("realistic.rho must be >= 0");
  if (!(clutter_radius > 0.0))
    throw std::invalid_argument("realistic.clutter_radius must be > 0");
  if (steps() < 1) throw std::invalid_argument("realistic.T_tot too small");
  if (spawn.dim() != 2 || spawn.is_empty())
    throw std::invalid_argument("realistic.spawn must be a 2-D box");
}

SimRun realistic_sim_run(const RealisticScenario& s, RandomSource& rng) {
  s.validate();
  std::vector<Pedestrian> peds(s.n_peds);
  for (auto& p : peds) {
    p.pos = Eigen::Vector2d{rng.uniform(s.spawn[0].lo, s.spawn[0].hi),
                            rng.uniform(s.spawn[1].lo, s.spawn[1].hi)};
    p.vel.setZero();
  }
  const int n = s.steps();
  SimRun run;
  run.truth.reserve(n);
  run.scans.reserve(n);
  double prev_x = 0.0, prev_y = 0.0;
  for (int k = 1; k <= n; ++k) {
    crowd_sim_step(peds, s.corridor, s.forces, s.Ts);
    CrowdState truth = crowd_truth_extract(peds, s.extent_floor);
    if (k > 1) {
      truth.x_dot = (truth.x - prev_x) / s.Ts;
      truth.y_dot = (truth.y - prev_y) / s.Ts;
    }
    prev_x = truth.x;
    prev_y = truth.y;
    run.truth.push_back(truth);
    run.scans.push_back(crowd_sim_measurements(peds, s.sensor, s.rho,
                                               s.clutter_radius, rng, k));
  }
  return run;
}

}  // namespace crowdtrack
