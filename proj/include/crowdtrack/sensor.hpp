#pragma once

#include <Eigen/Dense>
#include <vector>

#include "crowdtrack/box.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

struct SensorParams {
  Eigen::Vector2d sigma_z{0.1, 0.1};     // m, measurement noise std per axis
  double noise_bound_multiplier = 3.0;   // measurement box half-width in sigmas

  void validate() const;
};

struct MeasurementSet {
  std::vector<Eigen::Vector2d> points;
  std::vector<Box> boxes;  // 2-D, point inflated by multiplier*sigma per axis
  int k = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// The crowd rectangle q(s): extent box centred on the position.
Box crowd_rect(const CrowdState& s);

/// Crowd rectangle inflated by multiplier*sigma per axis; the support of the
/// crowd-measurement predictive density and the CPF kernel region.
Box r_region(const CrowdState& s, const SensorParams& sensor);

double r_area(const CrowdState& s, const SensorParams& sensor);

/// Measurement box around a point per the bounded-noise model.
Box measurement_box(const Eigen::Vector2d& z, const SensorParams& sensor);

/// Closed-form density of one measurement given the crowd state: per axis the
/// Gaussian CDF difference across the rectangle edges divided by the side.
double point_likelihood(const Eigen::Vector2d& z, const CrowdState& s,
                        const SensorParams& sensor);

/// Poisson crowd sources uniform in the rectangle plus Poisson clutter
/// uniform in the disc (minus the rectangle) centred on the crowd, all
/// perturbed by Gaussian noise and shuffled.
MeasurementSet generate_measurements(const CrowdState& s, double lambda_T,
                                     double lambda_C, const SensorParams& sensor,
                                     double clutter_radius, RandomSource& rng,
                                     int k = 0);

}  // namespace crowdtrack
