#include "crowdtrack/box_pf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crowdtrack/resampling.hpp"

namespace crowdtrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log-volume with degenerate widths clamped so a point dimension does not
// produce -inf on its own.
double log_volume(const Box& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) s += std::log(std::max(b[i].width(), 1e-12));
  return s;
}

void split_equal(const Box& b, int n, std::vector<Box>& out) {
  if (n == 1) {
    out.push_back(b);
    return;
  }
  int f = 2;
  while (n % f != 0) ++f;
  for (const Box& child : subdivide(b, f)) split_equal(child, n / f, out);
}

}  // namespace

std::vector<BoxParticle> bpf_init(const Box& prior, int n) {
  if (n < 1) throw std::invalid_argument("bpf_init: particle count must be >= 1");
  if (prior.is_empty()) throw std::invalid_argument("bpf_init: empty prior");
  std::vector<Box> boxes;
  boxes.reserve(n);
  split_equal(prior, n, boxes);
  std::vector<BoxParticle> particles(n);
  for (int i = 0; i < n; ++i) {
    particles[i].support = std::move(boxes[i]);
    particles[i].weight = 1.0 / n;
    particles[i].prev_pos = Box::empty(2);
  }
  return particles;
}

void bpf_predict(std::vector<BoxParticle>& particles, const DynamicsParams& p) {
  const Eigen::Matrix4d A = transition_matrix(p);
  const Eigen::Matrix4d Q = process_noise_cov(p);
  Box noise(4);
  for (int i = 0; i < 4; ++i) {
    const double half = 3.0 * std::sqrt(std::max(Q(i, i), 0.0));
    noise[i] = Interval{-half, half};
  }
  const double ext = 3.0 * p.sigma_theta;
  for (auto& particle : particles) {
    Box kin(4);
    for (int i = 0; i < 4; ++i) kin[i] = particle.support[i];
    const Box mapped = affine_inclusion(kin, A, noise);
    for (int i = 0; i < 4; ++i) particle.support[i] = mapped[i];
    particle.support[kIa] = inflate(particle.support[kIa], ext);
    particle.support[kIb] = inflate(particle.support[kIb], ext);
  }
}

Box contract(const Box& support, const Box& prev_pos, const Box& z_box,
             const DynamicsParams& p, const ContractionPolicy& policy) {
  Interval ix = support[kIx], ivx = support[kIxDot];
  Interval iy = support[kIy], ivy = support[kIyDot];
  Interval ia = support[kIa], ib = support[kIb];
  Interval mz1 = z_box[0], mz2 = z_box[1];
  const double c = velocity_coupling(p);
  const bool has_history = !prev_pos.is_empty();

  const auto widths = [&] {
    return std::array<double, 8>{ix.width(), ivx.width(), iy.width(),
                                 ivy.width(), ia.width(),  ib.width(),
                                 mz1.width(), mz2.width()};
  };

  for (int iter = 0; iter < policy.max_iters; ++iter) {
    const auto before = widths();

    // Position: x must sit within half an extent of the measurement.
    ix = intersect(ix, inflate(mz1, ia.hi / 2.0));
    if (ix.is_empty()) return Box::empty(kStateDim);
    iy = intersect(iy, inflate(mz2, ib.hi / 2.0));
    if (iy.is_empty()) return Box::empty(kStateDim);

    // Velocity: backward quotient against the previous contracted position.
    if (has_history) {
      ivx = intersect(ivx, (1.0 / c) * (ix - prev_pos[0]));
      if (ivx.is_empty()) return Box::empty(kStateDim);
      ivy = intersect(ivy, (1.0 / c) * (iy - prev_pos[1]));
      if (ivy.is_empty()) return Box::empty(kStateDim);
    }

    // Extent: the union of the +- branches of 2([z]-[x])/[0,1] is a lower
    // bound of twice the gap between the contracted position and the
    // measurement interval.
    const double gap_x = std::max({0.0, mz1.lo - ix.hi, ix.lo - mz1.hi});
    ia = intersect(ia, Interval{2.0 * gap_x, std::max(2.0 * gap_x, ia.hi)});
    if (ia.is_empty()) return Box::empty(kStateDim);
    const double gap_y = std::max({0.0, mz2.lo - iy.hi, iy.lo - mz2.hi});
    ib = intersect(ib, Interval{2.0 * gap_y, std::max(2.0 * gap_y, ib.hi)});
    if (ib.is_empty()) return Box::empty(kStateDim);

    // Measurement back-contraction feeding the next sweep.
    mz1 = intersect(mz1, inflate(ix, ia.hi / 2.0));
    if (mz1.is_empty()) return Box::empty(kStateDim);
    mz2 = intersect(mz2, inflate(iy, ib.hi / 2.0));
    if (mz2.is_empty()) return Box::empty(kStateDim);

    const auto after = widths();
    double max_shrink = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double rel =
          (before[i] - after[i]) / std::max(before[i], 1e-300);
      max_shrink = std::max(max_shrink, rel);
    }
    if (max_shrink < policy.rel_tol) break;
  }
  return Box{ix, ivx, iy, ivy, ia, ib};
}

double clutter_test_area(const Box& support) {
  const double dx = support[kIx].width();
  const double dy = support[kIy].width();
  const double outer =
      (dx + support[kIa].hi) * (dy + support[kIb].hi);
  const double inner = std::max(0.0, support[kIa].lo - dx) *
                       std::max(0.0, support[kIb].lo - dy);
  return std::max(0.0, outer - inner);
}

int estimate_q(double rho, double clutter_area) {
  if (rho <= 0.0 || clutter_area <= 0.0) return 0;
  return static_cast<int>(std::ceil(rho * clutter_area / 4.0));
}

BpfUpdateDiagnostics bpf_update(std::vector<BoxParticle>& particles,
                                const MeasurementSet& scan, double lambda_T,
                                double rho, const DynamicsParams& dyn,
                                const SensorParams& sensor,
                                const ContractionPolicy& policy) {
  BpfUpdateDiagnostics diag;
  const int m_total = scan.size();
  const int n = static_cast<int>(particles.size());
  diag.s_e_sizes.assign(n, 0);

  if (m_total == 0) {
    // No information: supports and weights stand, history tracks prediction.
    for (auto& particle : particles) {
      particle.prev_pos =
          Box{particle.support[kIx], particle.support[kIy]};
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = particles[i].weight;
    diag.n_eff = effective_sample_size(w);
    return diag;
  }

  std::vector<double> logw(n);
  std::vector<Box> combined(n, Box::empty(kStateDim));
  std::vector<std::vector<Box>> contracted(n);
  // Zero rates only occur in direct calls; keep the arithmetic finite.
  const double log_lambda_t = std::log(std::max(lambda_T, 1e-300));
  const double log_rho = std::log(std::max(rho, 1e-300));

  for (int pi = 0; pi < n; ++pi) {
    auto& particle = particles[pi];
    const Box& pred = particle.support;
    auto& cset = contracted[pi];
    for (int m = 0; m < m_total; ++m) {
      Box c = contract(pred, particle.prev_pos, scan.boxes[m], dyn, policy);
      if (!c.is_empty()) cset.push_back(std::move(c));
    }
    const int s_e = static_cast<int>(cset.size());
    diag.s_e_sizes[pi] = s_e;

    int q = static_cast<int>(std::ceil(rho * clutter_test_area(pred)));
    if (q < 0) q = 0;
    if (s_e > 0) {
      // The density estimate undercounts reachable clutter while the support
      // is coarse; q is a cap, so escalate it just far enough that a
      // consensus region survives.
      q = std::max(q, min_relaxed_q(cset));
      combined[pi] = q_relaxed_intersect(cset, q);
    }
    diag.max_q = std::max(diag.max_q, q);

    if (combined[pi].is_empty()) {
      logw[pi] = kNegInf;
      continue;
    }

    const double log_v = log_volume(pred);
    const double r = std::max(
        r_area(CrowdState::from_vec(pred.midpoint()), sensor), 1e-12);
    const int exponent = m_total - std::max(0, s_e - q);
    double lw = std::log(std::max(particle.weight, 0.0));
    lw -= exponent * log_v;
    lw += s_e * (log_lambda_t - log_rho - std::log(r) - log_v);
    lw += log_volume(combined[pi]);
    logw[pi] = lw;
  }

  // Normalize in the log domain.
  double max_lw = kNegInf;
  for (double v : logw) max_lw = std::max(max_lw, v);
  if (max_lw == kNegInf) {
    diag.degenerate_reset = true;
    for (auto& particle : particles) particle.weight = 1.0 / n;
  } else {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(logw[i] - max_lw);
    const double log_norm = max_lw + std::log(sum);
    for (int i = 0; i < n; ++i)
      particles[i].weight = std::exp(logw[i] - log_norm);
  }

  for (int i = 0; i < n; ++i) {
    if (!combined[i].is_empty()) particles[i].support = combined[i];
    particles[i].prev_pos =
        Box{particles[i].support[kIx], particles[i].support[kIy]};
  }

  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = particles[i].weight;
  diag.n_eff = effective_sample_size(w);
  return diag;
}

std::pair<Box, CrowdState> bpf_estimate(const std::vector<BoxParticle>& particles) {
  if (particles.empty()) throw std::invalid_argument("bpf_estimate: no particles");
  Box est(kStateDim);
  for (int d = 0; d < kStateDim; ++d) {
    double lo = 0.0, hi = 0.0;
    for (const auto& particle : particles) {
      lo += particle.weight * particle.support[d].lo;
      hi += particle.weight * particle.support[d].hi;
    }
    est[d] = Interval{lo, std::max(lo, hi)};
  }
  return {est, CrowdState::from_vec(est.midpoint())};
}

void bpf_resample(std::vector<BoxParticle>& particles, double n_thresh,
                  RandomSource& rng) {
  const int n = static_cast<int>(particles.size());
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = particles[i].weight;
  if (effective_sample_size(w) > n_thresh) return;

  const auto counts = systematic_counts(w, n, rng.uniform());
  std::vector<BoxParticle> next;
  next.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    if (counts[i] == 1) {
      next.push_back(particles[i]);
      next.back().weight = 1.0 / n;
      continue;
    }
    // Recursive widest-dimension splits keep the children balanced across
    // dimensions instead of slicing one axis into thin slabs.
    std::vector<Box> children;
    children.reserve(counts[i]);
    split_equal(particles[i].support, counts[i], children);
    for (Box& child : children) {
      BoxParticle bp;
      bp.weight = 1.0 / n;
      // A child asserts the state lies in its slice, so its own position
      // sub-box is the sound (and tighter) history for the next velocity
      // contraction.
      bp.prev_pos = Box{child[kIx], child[kIy]};
      bp.support = std::move(child);
      next.push_back(std::move(bp));
    }
  }
  particles = std::move(next);
}

BoxParticleFilter::BoxParticleFilter(const Box& prior, const BoxPfConfig& cfg,
                                     const DynamicsParams& dyn,
                                     const SensorParams& sensor)
    : particles_(bpf_init(prior, cfg.n_particles)),
      cfg_(cfg),
      dyn_(dyn),
      sensor_(sensor),
      rates_(cfg.rate_prior),
      prev_crowd_area_(prior[kIa].midpoint() * prior[kIb].midpoint()) {
  dyn_.validate();
  sensor_.validate();
  rates_.validate();
  if (cfg_.rates_known) {
    if (!(cfg_.lambda_T_true > 0.0) || !(cfg_.rho_true > 0.0))
      throw std::invalid_argument("box PF known rates must be > 0");
  }
}

FilterStepResult BoxParticleFilter::step(const MeasurementSet& scan,
                                         RandomSource& rng) {
  bpf_predict(particles_, dyn_);

  const double clutter_region =
      std::max(cfg_.sensor_area - prev_crowd_area_, 1.0);
  double lambda_t, rho;
  if (cfg_.rates_known) {
    lambda_t = cfg_.lambda_T_true;
    rho = cfg_.rho_true;
  } else {
    lambda_t = std::max(rates_.mean_T(), 1e-6);
    rho = std::max(rates_.mean_C() / clutter_region, 1e-12);
  }

  const auto diag = bpf_update(particles_, scan, lambda_t, rho, dyn_, sensor_,
                               cfg_.contraction);
  if (!cfg_.rates_known)
    rates_ = rate_update(rates_, diag.s_e_sizes, scan.size());

  const auto [box_est, point_est] = bpf_estimate(particles_);
  prev_crowd_area_ = std::max(point_est.a * point_est.b, 0.01);

  bpf_resample(particles_, cfg_.n_thresh_frac * cfg_.n_particles, rng);

  FilterStepResult out;
  out.estimate = point_est;
  out.box_estimate = box_est;
  out.n_eff = diag.n_eff;
  out.diverged = diag.degenerate_reset;
  if (cfg_.rates_known) {
    out.lambda_T_hat = cfg_.lambda_T_true;
    out.lambda_C_hat = cfg_.rho_true * clutter_region;
  } else {
    out.lambda_T_hat = rates_.mean_T();
    out.lambda_C_hat = rates_.mean_C();
  }
  return out;
}

}  // namespace crowdtrack
