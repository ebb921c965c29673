#pragma once

#include <vector>

#include "crowdtrack/box.hpp"
#include "crowdtrack/dynamics.hpp"
#include "crowdtrack/filter.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sensor.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

struct SirParticle {
  CrowdState state;
  double weight = 0.0;
};

/// N states drawn uniformly from the prior box, weights 1/N.
std::vector<SirParticle> sir_init(const Box& prior, int n, RandomSource& rng);

/// Propagate each state through the ground-truth transition kernel.
void sir_predict(std::vector<SirParticle>& particles, const DynamicsParams& p,
                 RandomSource& rng);

/// Extended-target likelihood update: per measurement each weight gains a
/// factor 1 + (lambda_T/rho) * point_likelihood(z, state), accumulated in the
/// log domain and normalized. Returns true when every weight vanished and
/// the weights were reset uniform.
bool sir_update(std::vector<SirParticle>& particles, const MeasurementSet& scan,
                double lambda_T, double rho, const SensorParams& sensor);

/// Systematic resampling by weight; weights reset to 1/N.
void sir_resample(std::vector<SirParticle>& particles, RandomSource& rng);

/// Weighted mean of states, componentwise.
CrowdState sir_estimate(const std::vector<SirParticle>& particles);

struct SirConfig {
  int n_particles = 1000;
  double lambda_T_true = 100.0;
  double rho_true = 0.01;  // 1/m^2, clutter spatial density
  double n_thresh_frac = 2.0 / 3.0;
};

/// Bootstrap filter with the extended-target likelihood; requires the true
/// rates (it has no mechanism to estimate them).
class SirParticleFilter final : public Filter {
 public:
  SirParticleFilter(const Box& prior, const SirConfig& cfg,
                    const DynamicsParams& dyn, const SensorParams& sensor,
                    RandomSource& rng);

  FilterStepResult step(const MeasurementSet& scan, RandomSource& rng) override;

  const std::vector<SirParticle>& particles() const { return particles_; }

 private:
  std::vector<SirParticle> particles_;
  SirConfig cfg_;
  DynamicsParams dyn_;
  SensorParams sensor_;
};

}  // namespace crowdtrack
