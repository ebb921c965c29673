#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "crowdtrack/simulators.hpp"

using namespace crowdtrack;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Local copy of the wall-crossing predicate so the no-tunnelling invariant is
// checked against an independent implementation, not the simulator's own.
bool crosses(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
             const Eigen::Vector2d& q0, const Eigen::Vector2d& q1) {
  const auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  const double d1 = cross(p1 - p0, q0 - p0);
  const double d2 = cross(p1 - p0, q1 - p0);
  const double d3 = cross(q1 - q0, p0 - q0);
  const double d4 = cross(q1 - q0, p1 - q0);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

TEST_SUITE("simulators") {
  TEST_CASE("rect defaults give 320 steps") {
    RectScenario s;
    CHECK(s.steps() == 320);
    CHECK(s.initial.x == 100.0);
    CHECK(s.initial.a == 40.0);
    CHECK(s.lambda_T == 100.0);
    CHECK(s.rho == 0.01);
  }

  TEST_CASE("rect zero rates produce empty scans") {
    RectScenario s;
    s.lambda_T = 0.0;
    s.rho = 0.0;
    RandomSource rng(7);
    const SimRun run = rect_sim_run(s, rng);
    REQUIRE(run.scans.size() == 320);
    for (const auto& scan : run.scans) CHECK(scan.size() == 0);
  }

  TEST_CASE("rect mean measurement count matches the Poisson rates") {
    RectScenario s;
    RandomSource rng(11);
    const SimRun run = rect_sim_run(s, rng);
    const double disc = kPi * s.clutter_radius * s.clutter_radius;
    double expected_total = 0.0;
    double observed_total = 0.0;
    for (size_t k = 0; k < run.truth.size(); ++k) {
      expected_total +=
          s.lambda_T +
          s.rho * std::max(disc - run.truth[k].a * run.truth[k].b, 0.0);
      observed_total += static_cast<double>(run.scans[k].size());
    }
    const double n = static_cast<double>(run.truth.size());
    // Mean of n independent Poisson counts: sd of the sample mean is
    // sqrt(sum of rates)/n.
    const double tol = 3.0 * std::sqrt(expected_total) / n;
    CHECK(std::abs(observed_total / n - expected_total / n) < tol);
  }

  TEST_CASE("rect runs are seed reproducible") {
    RectScenario s;
    RandomSource a(123), b(123);
    const SimRun ra = rect_sim_run(s, a);
    const SimRun rb = rect_sim_run(s, b);
    REQUIRE(ra.truth.size() == rb.truth.size());
    for (size_t k = 0; k < ra.truth.size(); ++k) {
      CHECK(ra.truth[k].vec() == rb.truth[k].vec());
      REQUIRE(ra.scans[k].size() == rb.scans[k].size());
      for (int m = 0; m < ra.scans[k].size(); ++m)
        CHECK(ra.scans[k].points[m] == rb.scans[k].points[m]);
    }
  }

  TEST_CASE("single pedestrian walks monotonically to the goal") {
    Corridor c;
    c.goals = {Eigen::Vector2d{10.0, 0.0}};
    ForceParams f;
    std::vector<Pedestrian> peds(1);
    peds[0].pos = Eigen::Vector2d{0.0, 0.0};
    double prev_dist = 10.0;
    for (int k = 0; k < 30; ++k) {
      crowd_sim_step(peds, c, f, 0.125);
      const double dist = (peds[0].pos - c.goals[0]).norm();
      CHECK(dist < prev_dist);
      CHECK(peds[0].vel.norm() <= f.speed_cap + 1e-12);
      prev_dist = dist;
    }
    // Constant 1 m/s^2 pull saturates the 2 m/s cap within 2 s.
    CHECK(peds[0].vel.norm() == doctest::Approx(f.speed_cap));
  }

  TEST_CASE("close pair repels: distance non-decreasing") {
    Corridor c;  // no goals, no walls
    ForceParams f;
    std::vector<Pedestrian> peds(2);
    peds[0].pos = Eigen::Vector2d{0.0, 0.0};
    peds[1].pos = Eigen::Vector2d{1.0, 0.3};
    double prev = (peds[0].pos - peds[1].pos).norm();
    REQUIRE(prev < f.ped_cutoff);
    for (int k = 0; k < 20; ++k) {
      crowd_sim_step(peds, c, f, 0.125);
      const double d = (peds[0].pos - peds[1].pos).norm();
      CHECK(d >= prev);
      prev = d;
    }
  }

  TEST_CASE("bounding box extraction") {
    SUBCASE("single pedestrian clamps to the extent floor") {
      std::vector<Pedestrian> peds(1);
      peds[0].pos = Eigen::Vector2d{3.0, -2.0};
      const CrowdState s = crowd_truth_extract(peds);
      CHECK(s.x == 3.0);
      CHECK(s.y == -2.0);
      CHECK(s.a == 0.1);
      CHECK(s.b == 0.1);
      CHECK(s.x_dot == 0.0);
      CHECK(s.y_dot == 0.0);
    }
    SUBCASE("four corners of a 10 x 20 rectangle") {
      std::vector<Pedestrian> peds(4);
      peds[0].pos = Eigen::Vector2d{5.0, 10.0};
      peds[1].pos = Eigen::Vector2d{15.0, 10.0};
      peds[2].pos = Eigen::Vector2d{5.0, 30.0};
      peds[3].pos = Eigen::Vector2d{15.0, 30.0};
      const CrowdState s = crowd_truth_extract(peds);
      CHECK(s.a == 10.0);
      CHECK(s.b == 20.0);
      CHECK(s.x == 10.0);
      CHECK(s.y == 20.0);
    }
    SUBCASE("permutation invariant") {
      RandomSource rng(5);
      std::vector<Pedestrian> peds(9);
      for (auto& p : peds)
        p.pos = Eigen::Vector2d{rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0)};
      const CrowdState base = crowd_truth_extract(peds);
      std::reverse(peds.begin(), peds.end());
      std::swap(peds[2], peds[6]);
      const CrowdState perm = crowd_truth_extract(peds);
      CHECK(base.vec() == perm.vec());
    }
  }

  TEST_CASE("crowd measurements") {
    RandomSource rng(31);
    std::vector<Pedestrian> peds(25);
    for (auto& p : peds)
      p.pos = Eigen::Vector2d{rng.uniform(90.0, 110.0), rng.uniform(95.0, 105.0)};

    SUBCASE("zero noise, zero clutter reproduces the positions") {
      SensorParams sensor;
      sensor.sigma_z = Eigen::Vector2d{0.0, 0.0};
      const MeasurementSet scan =
          crowd_sim_measurements(peds, sensor, 0.0, 100.0, rng, 3);
      REQUIRE(scan.size() == 25);
      CHECK(scan.k == 3);
      // The shuffle reorders, so match as sets.
      for (const auto& p : peds) {
        bool found = false;
        for (const auto& z : scan.points)
          found = found || (z - p.pos).norm() == 0.0;
        CHECK(found);
      }
    }
    SUBCASE("count is pedestrians plus Poisson clutter") {
      SensorParams sensor;
      const double rho = 1e-3, radius = 100.0;
      const double lambda_c = rho * kPi * radius * radius;
      double total = 0.0;
      const int reps = 400;
      for (int i = 0; i < reps; ++i)
        total += static_cast<double>(
            crowd_sim_measurements(peds, sensor, rho, radius, rng).size());
      const double expected = 25.0 + lambda_c;
      const double tol = 4.0 * std::sqrt(lambda_c / reps);
      CHECK(std::abs(total / reps - expected) < tol);
    }
    SUBCASE("every box contains its point") {
      SensorParams sensor;
      const MeasurementSet scan =
          crowd_sim_measurements(peds, sensor, 1e-3, 100.0, rng);
      REQUIRE(scan.boxes.size() == scan.points.size());
      for (int m = 0; m < scan.size(); ++m) {
        CHECK(scan.boxes[m][0].contains(scan.points[m][0]));
        CHECK(scan.boxes[m][1].contains(scan.points[m][1]));
      }
    }
  }

  TEST_CASE("bottleneck run: everyone passes the gap, nobody tunnels") {
    RealisticScenario s;
    s.validate();
    REQUIRE(s.steps() == 1200);
    RandomSource rng(2026);
    std::vector<Pedestrian> peds(s.n_peds);
    for (auto& p : peds) {
      p.pos = Eigen::Vector2d{rng.uniform(s.spawn[0].lo, s.spawn[0].hi),
                              rng.uniform(s.spawn[1].lo, s.spawn[1].hi)};
      p.vel.setZero();
    }
    std::vector<Eigen::Vector2d> prev(peds.size());
    double t_all_passed = -1.0;
    for (int k = 1; k <= s.steps(); ++k) {
      for (size_t i = 0; i < peds.size(); ++i) prev[i] = peds[i].pos;
      crowd_sim_step(peds, s.corridor, s.forces, s.Ts);
      int passed = 0;
      for (size_t i = 0; i < peds.size(); ++i) {
        for (const auto& w : s.corridor.walls)
          REQUIRE(!crosses(prev[i], peds[i].pos, w[0], w[1]));
        passed += peds[i].pos.x() > s.gap_x;
      }
      if (t_all_passed < 0 && passed == static_cast<int>(peds.size()))
        t_all_passed = k * s.Ts;
    }
    CHECK(t_all_passed > 0.0);       // all through within T_tot = 150 s
    CHECK(t_all_passed < 100.0);     // transit finishes near the 60 s mark
    CHECK(t_all_passed > 40.0);
  }

  TEST_CASE("realistic run: truth shape and seed reproducibility") {
    RealisticScenario s;
    s.T_tot = 30.0;  // spawn-to-funnel phase is enough for these checks
    RandomSource r1(99), r2(99);
    const SimRun a = realistic_sim_run(s, r1);
    const SimRun b = realistic_sim_run(s, r2);
    REQUIRE(a.truth.size() == 240);
    REQUIRE(a.scans.size() == 240);
    for (size_t k = 0; k < a.truth.size(); ++k) {
      CHECK(a.truth[k].vec() == b.truth[k].vec());
      REQUIRE(a.scans[k].size() == b.scans[k].size());
      for (int m = 0; m < a.scans[k].size(); ++m)
        CHECK(a.scans[k].points[m] == b.scans[k].points[m]);
      // Extents stay within the corridor bounding region.
      CHECK(a.truth[k].a >= 0.1);
      CHECK(a.truth[k].b >= 0.1);
      CHECK(a.truth[k].a <= 220.0);
      CHECK(a.truth[k].b <= 60.0);
    }
    // Centre velocity is the finite difference of consecutive centres.
    const double fd_x = (a.truth[10].x - a.truth[9].x) / s.Ts;
    CHECK(a.truth[10].x_dot == doctest::Approx(fd_x).epsilon(1e-12));
  }
}
