#pragma once

#include <cassert>
#include <vector>

namespace crowdtrack {

/// Effective sample size 1/sum(w^2) for normalized weights.
inline double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s > 0.0 ? 1.0 / s : 0.0;
}

/// Systematic resampling: offspring counts per parent from one uniform draw
/// u in [0,1). Deterministic given u; counts sum to n_out and each count is
/// floor or ceil of n_out * w[i].
inline std::vector<int> systematic_counts(const std::vector<double>& w,
                                          int n_out, double u) {
  assert(n_out > 0);
  assert(u >= 0.0 && u < 1.0);
  const int n = static_cast<int>(w.size());
  std::vector<int> counts(n, 0);
  double cum = 0.0;
  int i = 0;  // next position index
  for (int j = 0; j < n; ++j) {
    cum += w[j];
    while (i < n_out && (i + u) / n_out < cum) {
      counts[j]++;
      ++i;
    }
  }
  // Rounding slack: assign any unplaced positions to the last positive weight.
  if (i < n_out) {
    int last = n - 1;
    while (last > 0 && w[last] <= 0.0) --last;
    counts[last] += n_out - i;
  }
  return counts;
}

/// Parent index per offspring slot, in nondecreasing parent order.
inline std::vector<int> systematic_indices(const std::vector<double>& w,
                                           int n_out, double u) {
  const auto counts = systematic_counts(w, n_out, u);
  std::vector<int> idx;
  idx.reserve(n_out);
  for (int j = 0; j < static_cast<int>(counts.size()); ++j)
    for (int c = 0; c < counts[j]; ++c) idx.push_back(j);
  return idx;
}

}  // namespace crowdtrack
