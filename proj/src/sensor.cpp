#include "crowdtrack/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crowdtrack {

void SensorParams::validate() const {
  if (!(sigma_z[0] > 0.0) || !(sigma_z[1] > 0.0))
    throw std::invalid_argument("sensor.sigma_z must be > 0 componentwise");
  if (!(noise_bound_multiplier > 0.0))
    throw std::invalid_argument("sensor.noise_bound_multiplier must be > 0");
}

Box crowd_rect(const CrowdState& s) {
  return Box{Interval{s.x - s.a / 2.0, s.x + s.a / 2.0},
             Interval{s.y - s.b / 2.0, s.y + s.b / 2.0}};
}

Box r_region(const CrowdState& s, const SensorParams& sensor) {
  const double mx = sensor.noise_bound_multiplier * sensor.sigma_z[0];
  const double my = sensor.noise_bound_multiplier * sensor.sigma_z[1];
  Box r = crowd_rect(s);
  r[0] = inflate(r[0], mx);
  r[1] = inflate(r[1], my);
  return r;
}

double r_area(const CrowdState& s, const SensorParams& sensor) {
  const Box r = r_region(s, sensor);
  return r[0].width() * r[1].width();
}

Box measurement_box(const Eigen::Vector2d& z, const SensorParams& sensor) {
  const double mx = sensor.noise_bound_multiplier * sensor.sigma_z[0];
  const double my = sensor.noise_bound_multiplier * sensor.sigma_z[1];
  return Box{Interval{z[0] - mx, z[0] + mx}, Interval{z[1] - my, z[1] + my}};
}

namespace {

inline double std_normal_cdf(double t) {
  return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

// Gaussian mass over [lo, hi] divided by the side length; converges to the
// Gaussian density at z as the side shrinks.
double axis_factor(double z, double lo, double hi, double sigma) {
  const double side = hi - lo;
  if (side < 1e-12) {
    const double t = (z - 0.5 * (lo + hi)) / sigma;
    return std::exp(-0.5 * t * t) /
           (sigma * std::sqrt(2.0 * std::numbers::pi));
  }
  const double mass =
      std_normal_cdf((hi - z) / sigma) - std_normal_cdf((lo - z) / sigma);
  return mass / side;
}

}  // namespace

double point_likelihood(const Eigen::Vector2d& z, const CrowdState& s,
                        const SensorParams& sensor) {
  const Box q = crowd_rect(s);
  return axis_factor(z[0], q[0].lo, q[0].hi, sensor.sigma_z[0]) *
         axis_factor(z[1], q[1].lo, q[1].hi, sensor.sigma_z[1]);
}

MeasurementSet generate_measurements(const CrowdState& s, double lambda_T,
                                     double lambda_C, const SensorParams& sensor,
                                     double clutter_radius, RandomSource& rng,
                                     int k) {
  if (lambda_T < 0.0 || lambda_C < 0.0)
    throw std::invalid_argument("measurement rates must be >= 0");
  if (!(clutter_radius > 0.0))
    throw std::invalid_argument("clutter_radius must be > 0");

  const Box rect = crowd_rect(s);
  MeasurementSet out;
  out.k = k;

  const int m_t = rng.poisson(lambda_T);
  for (int i = 0; i < m_t; ++i) {
    Eigen::Vector2d src{rng.uniform(rect[0].lo, rect[0].hi),
                        rng.uniform(rect[1].lo, rect[1].hi)};
    out.points.emplace_back(src[0] + sensor.sigma_z[0] * rng.normal(),
                            src[1] + sensor.sigma_z[1] * rng.normal());
  }

  const int m_c = rng.poisson(lambda_C);
  for (int i = 0; i < m_c; ++i) {
    // Rejection: uniform in the disc about the crowd centre, excluding the
    // crowd rectangle. Capped so a rectangle swallowing the disc cannot hang.
    Eigen::Vector2d src;
    int tries = 0;
    do {
      do {
        src[0] = rng.uniform(-clutter_radius, clutter_radius);
        src[1] = rng.uniform(-clutter_radius, clutter_radius);
      } while (src.squaredNorm() > clutter_radius * clutter_radius);
      src[0] += s.x;
      src[1] += s.y;
    } while (rect.contains(src) && ++tries < 1000);
    out.points.emplace_back(src[0] + sensor.sigma_z[0] * rng.normal(),
                            src[1] + sensor.sigma_z[1] * rng.normal());
  }

  // Hide measurement origin: Fisher-Yates with the run's random source.
  for (int i = static_cast<int>(out.points.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(out.points[i], out.points[std::min(j, i)]);
  }

  out.boxes.reserve(out.points.size());
  for (const auto& z : out.points) out.boxes.push_back(measurement_box(z, sensor));
  return out;
}

}  // namespace crowdtrack
