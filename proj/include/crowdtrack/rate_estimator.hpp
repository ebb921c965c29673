#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace crowdtrack {

/// Gamma shape/rate posteriors for the crowd rate lambda_T and clutter rate
/// lambda_C. Conjugate to Poisson counts: one scan adds (count, 1).
struct RatePosterior {
  double alpha_T = 1.0;
  double beta_T = 0.01;
  double alpha_C = 1.0;
  double beta_C = 0.01;
  // Exponential forgetting applied before each update; 1 = none.
  double forgetting = 1.0;

  double mean_T() const { return alpha_T / beta_T; }
  double mean_C() const { return alpha_C / beta_C; }

  void validate() const {
    if (!(alpha_T > 0) || !(beta_T > 0) || !(alpha_C > 0) || !(beta_C > 0))
      throw std::invalid_argument("rate posterior parameters must be > 0");
    if (!(forgetting > 0))
      throw std::invalid_argument("rates.forgetting must be > 0");
  }
};

/// Split a scan's count into crowd/clutter attributions: the crowd count is
/// the smallest per-particle consistent-measurement count, the rest is
/// clutter. Returns (M_T, M_C).
inline std::pair<int, int> attribute_counts(
    const std::vector<int>& particles_S_E, int M_total) {
  if (particles_S_E.empty())
    throw std::invalid_argument("attribute_counts: empty particle list");
  if (M_total < 0)
    throw std::invalid_argument("attribute_counts: negative count");
  int m_t = particles_S_E.front();
  for (int v : particles_S_E) m_t = std::min(m_t, v);
  m_t = std::min(m_t, M_total);
  return {m_t, M_total - m_t};
}

/// One conjugate step: predict by forgetting, then absorb the scan's counts.
inline RatePosterior rate_update(const RatePosterior& post,
                                 const std::vector<int>& particles_S_E,
                                 int M_total) {
  const auto [m_t, m_c] = attribute_counts(particles_S_E, M_total);
  RatePosterior out = post;
  out.alpha_T = post.alpha_T / post.forgetting + m_t;
  out.beta_T = post.beta_T / post.forgetting + 1.0;
  out.alpha_C = post.alpha_C / post.forgetting + m_c;
  out.beta_C = post.beta_C / post.forgetting + 1.0;
  return out;
}

inline std::pair<double, double> rate_mean(const RatePosterior& post) {
  return {post.mean_T(), post.mean_C()};
}

}  // namespace crowdtrack
