#include "crowdtrack/sir_pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crowdtrack/resampling.hpp"

namespace crowdtrack {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<SirParticle> sir_init(const Box& prior, int n, RandomSource& rng) {
  if (n < 1) throw std::invalid_argument("sir_init: particle count must be >= 1");
  if (prior.is_empty() || prior.dim() != kStateDim)
    throw std::invalid_argument("sir_init: prior must be a non-empty state box");
  std::vector<SirParticle> particles(n);
  for (auto& particle : particles) {
    Eigen::Matrix<double, 6, 1> v;
    for (int d = 0; d < kStateDim; ++d)
      v(d) = rng.uniform(prior[d].lo, prior[d].hi);
    particle.state = CrowdState::from_vec(v);
    particle.weight = 1.0 / n;
  }
  return particles;
}

void sir_predict(std::vector<SirParticle>& particles, const DynamicsParams& p,
                 RandomSource& rng) {
  for (auto& particle : particles)
    particle.state = step_truth(particle.state, p, rng);
}

bool sir_update(std::vector<SirParticle>& particles, const MeasurementSet& scan,
                double lambda_T, double rho, const SensorParams& sensor) {
  if (!(rho > 0.0)) throw std::invalid_argument("sir_update: rho must be > 0");
  const int n = static_cast<int>(particles.size());
  if (n == 0 || scan.size() == 0) return false;

  const double ratio = lambda_T / rho;
  std::vector<double> logw(n);
  for (int i = 0; i < n; ++i) {
    double lw = std::log(std::max(particles[i].weight, 0.0));
    for (const auto& z : scan.points)
      lw += std::log1p(ratio * point_likelihood(z, particles[i].state, sensor));
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

void sir_resample(std::vector<SirParticle>& particles, RandomSource& rng) {
  const int n = static_cast<int>(particles.size());
  if (n == 0) return;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = particles[i].weight;
  const auto idx = systematic_indices(w, n, rng.uniform());
  std::vector<SirParticle> next(n);
  for (int i = 0; i < n; ++i) {
    next[i] = particles[idx[i]];
    next[i].weight = 1.0 / n;
  }
  particles = std::move(next);
}

CrowdState sir_estimate(const std::vector<SirParticle>& particles) {
  if (particles.empty())
    throw std::invalid_argument("sir_estimate: no particles");
  Eigen::Matrix<double, 6, 1> mean = Eigen::Matrix<double, 6, 1>::Zero();
  for (const auto& particle : particles)
    mean += particle.weight * particle.state.vec();
  return CrowdState::from_vec(mean);
}

SirParticleFilter::SirParticleFilter(const Box& prior, const SirConfig& cfg,
                                     const DynamicsParams& dyn,
                                     const SensorParams& sensor,
                                     RandomSource& rng)
    : particles_(sir_init(prior, cfg.n_particles, rng)),
      cfg_(cfg),
      dyn_(dyn),
      sensor_(sensor) {
  dyn_.validate();
  sensor_.validate();
  if (!(cfg_.lambda_T_true > 0.0) || !(cfg_.rho_true > 0.0))
    throw std::invalid_argument("SIR PF requires known positive rates");
}

FilterStepResult SirParticleFilter::step(const MeasurementSet& scan,
                                         RandomSource& rng) {
  sir_predict(particles_, dyn_, rng);
  const bool reset = sir_update(particles_, scan, cfg_.lambda_T_true,
                                cfg_.rho_true, sensor_);

  std::vector<double> w(particles_.size());
  for (std::size_t i = 0; i < particles_.size(); ++i)
    w[i] = particles_[i].weight;
  const double n_eff = effective_sample_size(w);

  const CrowdState est = sir_estimate(particles_);

  if (n_eff <= cfg_.n_thresh_frac * cfg_.n_particles)
    sir_resample(particles_, rng);

  FilterStepResult out;
  out.estimate = est;
  Box point_box(kStateDim);
  const Eigen::Matrix<double, 6, 1> v = est.vec();
  for (int d = 0; d < kStateDim; ++d) point_box[d] = Interval::point(v(d));
  out.box_estimate = point_box;
  out.n_eff = n_eff;
  out.diverged = reset;
  out.lambda_T_hat = cfg_.lambda_T_true;
  out.lambda_C_hat = 0.0;
  return out;
}

}  // namespace crowdtrack
