#pragma once

#include <Eigen/Dense>

namespace crowdtrack {

// State ordering shared by every module and file format: (x, xdot, y, ydot, a, b).
enum StateIndex : int { kIx = 0, kIxDot = 1, kIy = 2, kIyDot = 3, kIa = 4, kIb = 5 };
inline constexpr int kStateDim = 6;
inline constexpr const char* kComponentNames[kStateDim] = {"x",    "xdot", "y",
                                                           "ydot", "a",    "b"};

struct CrowdState {
  double x = 0;
  double x_dot = 0;
  double y = 0;
  double y_dot = 0;
  double a = 0;  // extent side along x, m
  double b = 0;  // extent side along y, m

  Eigen::Matrix<double, 6, 1> vec() const {
    Eigen::Matrix<double, 6, 1> v;
    v << x, x_dot, y, y_dot, a, b;
    return v;
  }
  static CrowdState from_vec(const Eigen::Matrix<double, 6, 1>& v) {
    return {v[kIx], v[kIxDot], v[kIy], v[kIyDot], v[kIa], v[kIb]};
  }
  double operator[](int i) const {
    switch (i) {
      case kIx: return x;
      case kIxDot: return x_dot;
      case kIy: return y;
      case kIyDot: return y_dot;
      case kIa: return a;
      default: return b;
    }
  }
};

}  // namespace crowdtrack
