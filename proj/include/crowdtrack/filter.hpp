#pragma once

#include "crowdtrack/box.hpp"
#include "crowdtrack/rng.hpp"
#include "crowdtrack/sensor.hpp"
#include "crowdtrack/state.hpp"

namespace crowdtrack {

/// Per-step output common to all filters.
struct FilterStepResult {
  CrowdState estimate;
  Box box_estimate = Box::empty(kStateDim);  // point filters report a point box
  double n_eff = 0.0;
  bool diverged = false;  // degeneracy reset happened this step
  double lambda_T_hat = 0.0;
  double lambda_C_hat = 0.0;
};

class Filter {
 public:
  virtual ~Filter() = default;
  virtual FilterStepResult step(const MeasurementSet& scan, RandomSource& rng) = 0;
};

}  // namespace crowdtrack
