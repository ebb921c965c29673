#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <utility>
#include <vector>

#include "crowdtrack/interval.hpp"

namespace crowdtrack {

/// Axis-aligned box: a vector of closed intervals. A box is empty as soon as
/// any dimension is empty.
class Box {
 public:
  Box() = default;
  explicit Box(int dim) : dims_(dim, Interval{0, 0}) {}
  explicit Box(std::vector<Interval> dims) : dims_(std::move(dims)) {}
  Box(std::initializer_list<Interval> dims) : dims_(dims) {}

  static Box empty(int dim) {
    Box b(dim);
    for (auto& d : b.dims_) d = Interval::empty();
    return b;
  }

  int dim() const { return static_cast<int>(dims_.size()); }
  const Interval& operator[](int i) const { return dims_[i]; }
  Interval& operator[](int i) { return dims_[i]; }

  bool is_empty() const {
    for (const auto& d : dims_) {
      if (d.is_empty()) return true;
    }
    return dims_.empty();
  }

  double volume() const {
    if (is_empty()) return 0.0;
    double v = 1.0;
    for (const auto& d : dims_) v *= d.width();
    return v;
  }

  Eigen::VectorXd midpoint() const {
    assert(!is_empty());
    Eigen::VectorXd m(dim());
    for (int i = 0; i < dim(); ++i) m[i] = dims_[i].midpoint();
    return m;
  }

  bool contains(const Eigen::VectorXd& p) const {
    assert(p.size() == dim());
    for (int i = 0; i < dim(); ++i) {
      if (!dims_[i].contains(p[i])) return false;
    }
    return !dims_.empty();
  }

  bool contains(const Box& o) const {
    assert(o.dim() == dim());
    if (o.is_empty()) return true;
    for (int i = 0; i < dim(); ++i) {
      if (!dims_[i].contains(o.dims_[i])) return false;
    }
    return true;
  }

  /// Index of the widest dimension; ties break to the lowest index.
  int widest_dim() const {
    int best = 0;
    double w = dims_[0].width();
    for (int i = 1; i < dim(); ++i) {
      if (dims_[i].width() > w) {
        w = dims_[i].width();
        best = i;
      }
    }
    return best;
  }

  friend bool operator==(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) return false;
    if (a.is_empty() || b.is_empty()) return a.is_empty() && b.is_empty();
    return a.dims_ == b.dims_;
  }

 private:
  std::vector<Interval> dims_;
};

inline Box intersect(const Box& a, const Box& b) {
  assert(a.dim() == b.dim());
  Box out(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    out[i] = intersect(a[i], b[i]);
    if (out[i].is_empty()) return Box::empty(a.dim());
  }
  return out;
}

inline Box hull(const Box& a, const Box& b) {
  assert(a.dim() == b.dim());
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  Box out(a.dim());
  for (int i = 0; i < a.dim(); ++i) out[i] = hull(a[i], b[i]);
  return out;
}

/// Relaxed intersection of n intervals: hull of all points covered by at
/// least n - q of them (at least one regardless of q). Computed by an
/// endpoint sweep; closed endpoints count, so touching intervals overlap.
inline Interval q_relaxed_intersect(const std::vector<Interval>& xs, int q) {
  const int n = static_cast<int>(xs.size());
  assert(n > 0);
  const int need = std::max(1, n - q);

  struct Event {
    double coord;
    int starts;
    int ends;
  };
  std::vector<std::pair<double, bool>> raw;  // (coord, is_start)
  raw.reserve(2 * n);
  for (const auto& x : xs) {
    if (x.is_empty()) continue;
    raw.emplace_back(x.lo, true);
    raw.emplace_back(x.hi, false);
  }
  if (raw.empty()) return Interval::empty();
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Interval out = Interval::empty();
  int active = 0;
  std::size_t i = 0;
  while (i < raw.size()) {
    const double c = raw[i].first;
    int starts = 0, ends = 0;
    for (; i < raw.size() && raw[i].first == c; ++i) {
      (raw[i].second ? starts : ends)++;
    }
    active += starts;
    // Coverage at the point c itself: intervals ending here are still closed.
    if (active >= need) out = hull(out, Interval::point(c));
    active -= ends;
    // Coverage on the open gap up to the next event coordinate.
    if (active >= need && i < raw.size()) {
      out = hull(out, Interval{c, raw[i].first});
    }
  }
  return out;
}

/// Dimension-wise relaxed intersection of n boxes with relaxation q applied
/// independently per dimension. q = 0 is the plain intersection; q >= n is
/// the hull of the union.
inline Box q_relaxed_intersect(const std::vector<Box>& boxes, int q) {
  assert(!boxes.empty());
  const int d = boxes.front().dim();
  Box out(d);
  std::vector<Interval> slice(boxes.size());
  for (int i = 0; i < d; ++i) {
    for (std::size_t p = 0; p < boxes.size(); ++p) {
      assert(boxes[p].dim() == d);
      slice[p] = boxes[p].is_empty() ? Interval::empty() : boxes[p][i];
    }
    out[i] = q_relaxed_intersect(slice, q);
    if (out[i].is_empty()) return Box::empty(d);
  }
  return out;
}

/// Smallest q for which the dimension-wise relaxed intersection of the boxes
/// is non-empty: n minus the weakest dimension's best simultaneous-overlap
/// count. Returns n when no dimension has any coverage (all boxes empty).
inline int min_relaxed_q(const std::vector<Box>& boxes) {
  assert(!boxes.empty());
  const int n = static_cast<int>(boxes.size());
  const int d = boxes.front().dim();
  int worst_cover = n;
  std::vector<std::pair<double, bool>> raw;  // (coord, is_start)
  for (int i = 0; i < d; ++i) {
    raw.clear();
    for (const auto& b : boxes) {
      if (b.is_empty()) continue;
      raw.emplace_back(b[i].lo, true);
      raw.emplace_back(b[i].hi, false);
    }
    if (raw.empty()) return n;
    std::sort(raw.begin(), raw.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    int active = 0, best = 0;
    std::size_t j = 0;
    while (j < raw.size()) {
      const double c = raw[j].first;
      int starts = 0, ends = 0;
      for (; j < raw.size() && raw[j].first == c; ++j) {
        (raw[j].second ? starts : ends)++;
      }
      active += starts;
      best = std::max(best, active);
      active -= ends;
    }
    worst_cover = std::min(worst_cover, best);
  }
  return n - worst_cover;
}

/// Split a box into `parts` equal slices along its widest dimension. Cut
/// points are lo + i*step so slice widths telescope to the parent width
/// exactly. A degenerate box yields `parts` copies of itself.
inline std::vector<Box> subdivide(const Box& b, int parts) {
  assert(parts >= 1);
  assert(!b.is_empty());
  std::vector<Box> out;
  out.reserve(parts);
  if (parts == 1) {
    out.push_back(b);
    return out;
  }
  const int d = b.widest_dim();
  const double lo = b[d].lo, hi = b[d].hi;
  const double step = (hi - lo) / parts;
  double cut = lo;
  for (int i = 0; i < parts; ++i) {
    const double next = (i + 1 == parts) ? hi : lo + (i + 1) * step;
    Box child = b;
    child[d] = Interval{cut, std::max(cut, next)};
    out.push_back(std::move(child));
    cut = std::max(cut, next);
  }
  return out;
}

/// Tightest interval image of x -> A*x + w for an interval vector x and an
/// interval noise vector w (exact per dimension for a point matrix A).
inline Box affine_inclusion(const Box& x, const Eigen::MatrixXd& A,
                            const Box& noise) {
  assert(A.cols() == x.dim());
  assert(A.rows() == noise.dim());
  if (x.is_empty() || noise.is_empty())
    return Box::empty(static_cast<int>(A.rows()));
  Box out(static_cast<int>(A.rows()));
  for (int r = 0; r < A.rows(); ++r) {
    Interval acc = noise[r];
    for (int c = 0; c < A.cols(); ++c) acc = acc + A(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

}  // namespace crowdtrack
