#include "crowdtrack/conv_pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crowdtrack/resampling.hpp"

namespace crowdtrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void refresh_support(PointParticle& particle, const SensorParams& sensor) {
  particle.kernel_support = r_region(particle.state, sensor);
}

}  // namespace

std::vector<PointParticle> cpf_init(const Box& prior, int n, RandomSource& rng) {
  if (n < 1) throw std::invalid_argument("cpf_init: particle count must be >= 1");
  if (prior.is_empty() || prior.dim() != kStateDim)
    throw std::invalid_argument("cpf_init: prior must be a non-empty state box");
  std::vector<PointParticle> particles(n);
  for (auto& particle : particles) {
    Eigen::VectorXd v(kStateDim);
    for (int d = 0; d < kStateDim; ++d)
      v(d) = rng.uniform(prior[d].lo, prior[d].hi);
    particle.state = CrowdState::from_vec(v);
    particle.weight = 1.0 / n;
  }
  return particles;
}

void cpf_predict(std::vector<PointParticle>& particles, const DynamicsParams& p,
                 const SensorParams& sensor, RandomSource& rng) {
  for (auto& particle : particles) {
    particle.state = step_truth(particle.state, p, rng);
    refresh_support(particle, sensor);
  }
}

double cpf_kernel(const Eigen::Vector2d& z, const PointParticle& particle,
                  double sensor_region_area, bool z_in_sensor_region) {
  if (!(sensor_region_area > 0.0))
    throw std::invalid_argument("cpf_kernel: sensor region area must be > 0");
  const Box& cs = particle.kernel_support;
  double value = 0.0;
  if (!cs.is_empty() && cs.contains(z)) {
    const double area = cs[0].width() * cs[1].width();
    if (area > 0.0) value += 1.0 / area;
  }
  if (z_in_sensor_region) value += 1.0 / sensor_region_area;
  return value;
}

bool cpf_update(std::vector<PointParticle>& particles,
                const MeasurementSet& scan, double sensor_region_area) {
  const int n = static_cast<int>(particles.size());
  if (n == 0) return false;
  if (scan.size() == 0) return false;

  std::vector<double> logw(n);
  for (int i = 0; i < n; ++i) {
    double lw = std::log(std::max(particles[i].weight, 0.0));
    for (const auto& z : scan.points) {
      const double k = cpf_kernel(z, particles[i], sensor_region_area);
      lw += k > 0.0 ? std::log(k) : kNegInf;
    }
    logw[i] = lw;
  }

  double max_lw = kNegInf;
  for (double v : logw) max_lw = std::max(max_lw, v);
  if (max_lw == kNegInf) {
    for (auto& particle : particles) particle.weight = 1.0 / n;
    return true;
  }
  double sum = 0.0;
  for (double v : logw) sum += std::exp(v - max_lw);
  const double log_norm = max_lw + std::log(sum);
  for (int i = 0; i < n; ++i)
    particles[i].weight = std::exp(logw[i] - log_norm);
  return false;
}

void cpf_resample(std::vector<PointParticle>& particles, RandomSource& rng) {
  const int n = static_cast<int>(particles.size());
  if (n == 0) return;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = particles[i].weight;
  const auto idx = systematic_indices(w, n, rng.uniform());
  std::vector<PointParticle> next(n);
  for (int i = 0; i < n; ++i) {
    next[i] = particles[idx[i]];
    next[i].weight = 1.0 / n;
  }
  particles = std::move(next);
}

CrowdState cpf_estimate(const std::vector<PointParticle>& particles) {
  if (particles.empty())
    throw std::invalid_argument("cpf_estimate: no particles");
  Eigen::Matrix<double, 6, 1> mean = Eigen::Matrix<double, 6, 1>::Zero();
  for (const auto& particle : particles)
    mean += particle.weight * particle.state.vec();
  return CrowdState::from_vec(mean);
}

ConvolutionParticleFilter::ConvolutionParticleFilter(const Box& prior,
                                                     const CpfConfig& cfg,
                                                     const DynamicsParams& dyn,
                                                     const SensorParams& sensor,
                                                     RandomSource& rng)
    : particles_(cpf_init(prior, cfg.n_particles, rng)),
      cfg_(cfg),
      dyn_(dyn),
      sensor_(sensor) {
  dyn_.validate();
  sensor_.validate();
  if (!(cfg_.sensor_region_area > 0.0))
    throw std::invalid_argument("CPF sensor region area must be > 0");
  for (auto& particle : particles_) refresh_support(particle, sensor_);
}

FilterStepResult ConvolutionParticleFilter::step(const MeasurementSet& scan,
                                                 RandomSource& rng) {
  cpf_predict(particles_, dyn_, sensor_, rng);
  const bool reset = cpf_update(particles_, scan, cfg_.sensor_region_area);

  std::vector<double> w(particles_.size());
  for (std::size_t i = 0; i < particles_.size(); ++i)
    w[i] = particles_[i].weight;
  const double n_eff = effective_sample_size(w);

  const CrowdState est = cpf_estimate(particles_);

  if (cfg_.resample_every_step ||
      n_eff <= cfg_.n_thresh_frac * cfg_.n_particles)
    cpf_resample(particles_, rng);

  FilterStepResult out;
  out.estimate = est;
  Box point_box(kStateDim);
  const Eigen::Matrix<double, 6, 1> v = est.vec();
  for (int d = 0; d < kStateDim; ++d) point_box[d] = Interval::point(v(d));
  out.box_estimate = point_box;
  out.n_eff = n_eff;
  out.diverged = reset;
  return out;
}

}  // namespace crowdtrack
