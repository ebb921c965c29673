#pragma once

#include <Eigen/Dense>

#include "crowdtrack/rng.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

struct DynamicsParams {
  double alpha = 1.0 / 15.0;  // 1/s, reciprocal velocity-correlation time
  double sigma_v = 10.0;      // m/s, stationary velocity std
  double Ts = 0.125;          // s
  double sigma_theta = 1.0;   // m per step, extent random-walk std per side
  double extent_floor = 0.1;  // m

  void validate() const;
};

/// Velocity-position coupling (1 - e^{-alpha Ts})/alpha; the divisor in the
/// backward velocity contractor.
double velocity_coupling(const DynamicsParams& p);

/// 4x4 kinematic transition for (x, xdot, y, ydot): identical 2x2 blocks
/// [[1, coupling],[0, e^{-alpha Ts}]] per axis.
Eigen::Matrix4d transition_matrix(const DynamicsParams& p);

/// Exact discretized covariance of the correlated-velocity noise,
/// 2*alpha*sigma_v^2 * [[q11,q12],[q12,q22]] per axis. Evaluated through
/// expm1 plus a small-argument series so it stays accurate as alpha -> 0.
Eigen::Matrix4d process_noise_cov(const DynamicsParams& p);

/// One ground-truth step: kinematics through the transition matrix plus
/// correlated noise, extent sides on a clamped random walk. Draw order is
/// fixed (4 kinematic normals, then 2 extent normals).
CrowdState step_truth(const CrowdState& s, const DynamicsParams& p,
                      RandomSource& rng);

}  // namespace crowdtrack
