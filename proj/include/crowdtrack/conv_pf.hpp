#pragma once

#include <utility>
#include <vector>

#include "crowdtrack/box.hpp"
#include "crowdtrack/dynamics.hpp"
#include "crowdtrack/filter.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sensor.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

/// Point particle for the convolution filter. kernel_support is the crowd
/// measurement region of the current state, recomputed after every predict.
struct PointParticle {
  CrowdState state;
  double weight = 0.0;
  Box kernel_support = Box::empty(2);
};

/// N states drawn uniformly from the prior box, weights 1/N.
std::vector<PointParticle> cpf_init(const Box& prior, int n, RandomSource& rng);

/// Propagate each state through the ground-truth transition kernel and
/// refresh kernel_support from the new state.
void cpf_predict(std::vector<PointParticle>& particles, const DynamicsParams& p,
                 const SensorParams& sensor, RandomSource& rng);

/// Compositional kernel: a uniform density over the particle's measurement
/// region plus a uniform density over the whole sensor region. Strictly
/// positive for any in-region measurement, so clutter never zeroes a weight.
/// Callers that know a measurement fell outside the sensor region pass
/// z_in_sensor_region = false and lose the floor term.
double cpf_kernel(const Eigen::Vector2d& z, const PointParticle& particle,
                  double sensor_region_area, bool z_in_sensor_region = true);

/// Multiply each weight by the kernel product over the scan (in the log
/// domain) and normalize. Returns true when every weight vanished and the
/// weights were reset uniform.
bool cpf_update(std::vector<PointParticle>& particles,
                const MeasurementSet& scan, double sensor_region_area);

/// Systematic resampling by weight; weights reset to 1/N.
void cpf_resample(std::vector<PointParticle>& particles, RandomSource& rng);

/// Weighted mean of states, componentwise.
CrowdState cpf_estimate(const std::vector<PointParticle>& particles);

struct CpfConfig {
  int n_particles = 1000;
  double sensor_region_area = 31415.926535897932;  // disc of radius 100
  // Resampling every step is the literal reading of the filter's recursion;
  // the ESS-triggered variant exists for like-for-like comparisons.
  bool resample_every_step = true;
  double n_thresh_frac = 2.0 / 3.0;
};

class ConvolutionParticleFilter final : public Filter {
 public:
  ConvolutionParticleFilter(const Box& prior, const CpfConfig& cfg,
                            const DynamicsParams& dyn,
                            const SensorParams& sensor, RandomSource& rng);

  FilterStepResult step(const MeasurementSet& scan, RandomSource& rng) override;

  const std::vector<PointParticle>& particles() const { return particles_; }

 private:
  std::vector<PointParticle> particles_;
  CpfConfig cfg_;
  DynamicsParams dyn_;
  SensorParams sensor_;
};

}  // namespace crowdtrack
