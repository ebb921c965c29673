#include "crowdtrack/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdtrack {

void DynamicsParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("dynamics.alpha must be > 0");
  if (!(Ts > 0.0)) throw std::invalid_argument("dynamics.Ts must be > 0");
  if (sigma_v < 0.0) throw std::invalid_argument("dynamics.sigma_v must be >= 0");
  if (sigma_theta < 0.0)
    throw std::invalid_argument("dynamics.sigma_theta must be >= 0");
  if (!(extent_floor > 0.0))
    throw std::invalid_argument("dynamics.extent_floor must be > 0");
}

double velocity_coupling(const DynamicsParams& p) {
  return -std::expm1(-p.alpha * p.Ts) / p.alpha;
}

Eigen::Matrix4d transition_matrix(const DynamicsParams& p) {
  const double decay = std::exp(-p.alpha * p.Ts);
  const double c = velocity_coupling(p);
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  A(0, 0) = 1.0;
  A(0, 1) = c;
  A(1, 1) = decay;
  A(2, 2) = 1.0;
  A(2, 3) = c;
  A(3, 3) = decay;
  return A;
}

namespace {

// (4 e^{-u} - 3 - e^{-2u} + 2u) / 2: the position-variance kernel. Direct
// evaluation cancels catastrophically for small u, so a Taylor series takes
// over below the crossover where both branches agree to ~1e-9 relative.
double q11_kernel(double u) {
  if (u < 0.02) {
    const double u3 = u * u * u;
    return 0.5 * u3 * (2.0 / 3.0 + u * (-0.5 + u * (7.0 / 30.0 +
                       u * (-1.0 / 12.0 + u * (31.0 / 1260.0)))));
  }
  return 0.5 * (4.0 * std::exp(-u) - 3.0 - std::exp(-2.0 * u) + 2.0 * u);
}

}  // namespace

Eigen::Matrix4d process_noise_cov(const DynamicsParams& p) {
  const double a = p.alpha;
  const double u = a * p.Ts;
  const double e1 = std::expm1(-u);  // e^{-u} - 1
  const double q11 = q11_kernel(u) / (a * a * a);
  const double q12 = e1 * e1 / (2.0 * a * a);
  const double q22 = -std::expm1(-2.0 * u) / (2.0 * a);
  const double scale = 2.0 * a * p.sigma_v * p.sigma_v;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    const int i = 2 * axis;
    Q(i, i) = scale * q11;
    Q(i, i + 1) = scale * q12;
    Q(i + 1, i) = scale * q12;
    Q(i + 1, i + 1) = scale * q22;
  }
  return Q;
}

CrowdState step_truth(const CrowdState& s, const DynamicsParams& p,
                      RandomSource& rng) {
  const Eigen::Matrix4d A = transition_matrix(p);
  const Eigen::Matrix4d Q = process_noise_cov(p);
  Eigen::Vector4d kin;
  kin << s.x, s.x_dot, s.y, s.y_dot;

  Eigen::Vector4d n;
  for (int i = 0; i < 4; ++i) n[i] = rng.normal();
  kin = A * kin;
  if (p.sigma_v > 0.0) {
    const Eigen::Matrix4d L = Eigen::LLT<Eigen::Matrix4d>(Q).matrixL();
    kin += L * n;
  }

  CrowdState out;
  out.x = kin[0];
  out.x_dot = kin[1];
  out.y = kin[2];
  out.y_dot = kin[3];
  out.a = std::max(p.extent_floor, s.a + p.sigma_theta * rng.normal());
  out.b = std::max(p.extent_floor, s.b + p.sigma_theta * rng.normal());
  return out;
}

}  // namespace crowdtrack
