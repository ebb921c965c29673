#pragma once

#include <utility>
#include <vector>

#include "crowdtrack/box.hpp"
#include "crowdtrack/dynamics.hpp"
#include "crowdtrack/filter.hpp"
#include "crowdtrack/rate_estimator.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sensor.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

struct BoxParticle {
  Box support = Box(kStateDim);  // 6-D, CrowdState ordering
  double weight = 0.0;
  // Previous step's contracted (x, y) intervals; empty before the first
  // update, in which case the velocity contractor is skipped.
  Box prev_pos = Box::empty(2);
};

struct ContractionPolicy {
  int max_iters = 10;
  double rel_tol = 1e-6;
};

/// Partition the prior into N equal-volume boxes by repeated equal-width
/// splits of the widest dimension, weights 1/N.
std::vector<BoxParticle> bpf_init(const Box& prior, int n);

/// Propagate supports through the interval image of the dynamics: kinematic
/// dims through the transition matrix plus a +-3 std noise box, extent dims
/// inflated by +-3 sigma_theta. Weights and history unchanged.
void bpf_predict(std::vector<BoxParticle>& particles, const DynamicsParams& p);

/// Constraint propagation of one particle against one measurement box,
/// iterated to a fixed point. Returns the contracted 6-D box, or an empty box
/// when the measurement is inconsistent with the particle.
Box contract(const Box& support, const Box& prev_pos, const Box& z_box,
             const DynamicsParams& p, const ContractionPolicy& policy = {});

/// Area of the region in measurement space where a measurement can still
/// contract this support: outer inflated rectangle minus the inner always-hit
/// rectangle, factors clamped at zero.
double clutter_test_area(const Box& support);

/// Expected nearby-clutter allowance q = ceil(rho * area / 4), at least 0.
int estimate_q(double rho, double clutter_area);

struct BpfUpdateDiagnostics {
  double n_eff = 0.0;
  bool degenerate_reset = false;
  std::vector<int> s_e_sizes;  // consistent-measurement count per particle
  int max_q = 0;
};

/// Contract every particle against every measurement, combine the surviving
/// boxes with the particle's relaxed intersection, and reweight in the log
/// domain. Weights are normalized on return.
BpfUpdateDiagnostics bpf_update(std::vector<BoxParticle>& particles,
                                const MeasurementSet& scan, double lambda_T,
                                double rho, const DynamicsParams& dyn,
                                const SensorParams& sensor,
                                const ContractionPolicy& policy = {});

/// Weighted endpoint average of supports; point estimate is its midpoint.
std::pair<Box, CrowdState> bpf_estimate(const std::vector<BoxParticle>& particles);

/// Subdivision resampling: when N_eff <= n_thresh, draw replication counts
/// systematically and replace each chosen particle by that many recursive
/// widest-dimension subdivisions of its support; weights reset to 1/N.
void bpf_resample(std::vector<BoxParticle>& particles, double n_thresh,
                  RandomSource& rng);

struct BoxPfConfig {
  int n_particles = 16;
  bool rates_known = true;
  double lambda_T_true = 100.0;
  double rho_true = 0.01;
  double sensor_area = 31415.926535897932;  // A_S, disc of radius 100
  double n_thresh_frac = 2.0 / 3.0;
  ContractionPolicy contraction;
  RatePosterior rate_prior;  // used when rates are estimated
};

class BoxParticleFilter final : public Filter {
 public:
  BoxParticleFilter(const Box& prior, const BoxPfConfig& cfg,
                    const DynamicsParams& dyn, const SensorParams& sensor);

  FilterStepResult step(const MeasurementSet& scan, RandomSource& rng) override;

  const std::vector<BoxParticle>& particles() const { return particles_; }
  const RatePosterior& rates() const { return rates_; }

 private:
  std::vector<BoxParticle> particles_;
  BoxPfConfig cfg_;
  DynamicsParams dyn_;
  SensorParams sensor_;
  RatePosterior rates_;
  double prev_crowd_area_;
};

}  // namespace crowdtrack
