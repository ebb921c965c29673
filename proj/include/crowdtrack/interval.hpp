#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace crowdtrack {

/// Clamp applied to unbounded results of extended division so that every
/// downstream width/volume stays finite.
inline constexpr double kDomainBound = 1e9;

/// Closed interval [lo, hi]. The empty interval is a first-class value,
/// distinct from every [lo, hi] with lo <= hi, and absorbing through all
/// arithmetic.
template <typename Scalar = double>
struct IntervalT {
  Scalar lo;
  Scalar hi;

  constexpr IntervalT() : lo(0), hi(0) {}
  constexpr IntervalT(Scalar l, Scalar h) : lo(l), hi(h) { assert(!(l > h)); }

  static constexpr IntervalT point(Scalar v) { return {v, v}; }
  static constexpr IntervalT empty() {
    IntervalT i;
    i.lo = std::numeric_limits<Scalar>::infinity();
    i.hi = -std::numeric_limits<Scalar>::infinity();
    return i;
  }
  static constexpr IntervalT whole(Scalar bound = Scalar(kDomainBound)) {
    return {-bound, bound};
  }

  constexpr bool is_empty() const { return lo > hi; }
  constexpr Scalar width() const { return is_empty() ? Scalar(0) : hi - lo; }
  constexpr Scalar midpoint() const {
    assert(!is_empty());
    return (lo + hi) / Scalar(2);
  }
  constexpr bool contains(Scalar v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const IntervalT& o) const {
    return o.is_empty() || (lo <= o.lo && o.hi <= hi);
  }

  friend constexpr bool operator==(const IntervalT& a, const IntervalT& b) {
    if (a.is_empty() || b.is_empty()) return a.is_empty() && b.is_empty();
    return a.lo == b.lo && a.hi == b.hi;
  }
};

using Interval = IntervalT<double>;

template <typename S>
constexpr IntervalT<S> intersect(const IntervalT<S>& a, const IntervalT<S>& b) {
  if (a.is_empty() || b.is_empty()) return IntervalT<S>::empty();
  const S lo = std::max(a.lo, b.lo);
  const S hi = std::min(a.hi, b.hi);
  return lo > hi ? IntervalT<S>::empty() : IntervalT<S>{lo, hi};
}

template <typename S>
constexpr IntervalT<S> hull(const IntervalT<S>& a, const IntervalT<S>& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

template <typename S>
constexpr IntervalT<S> operator+(const IntervalT<S>& a, const IntervalT<S>& b) {
  if (a.is_empty() || b.is_empty()) return IntervalT<S>::empty();
  return {a.lo + b.lo, a.hi + b.hi};
}

template <typename S>
constexpr IntervalT<S> operator-(const IntervalT<S>& a, const IntervalT<S>& b) {
  if (a.is_empty() || b.is_empty()) return IntervalT<S>::empty();
  return {a.lo - b.hi, a.hi - b.lo};
}

template <typename S>
constexpr IntervalT<S> operator+(const IntervalT<S>& a, S s) {
  if (a.is_empty()) return a;
  return {a.lo + s, a.hi + s};
}

template <typename S>
constexpr IntervalT<S> operator*(S s, const IntervalT<S>& a) {
  if (a.is_empty()) return a;
  return s >= S(0) ? IntervalT<S>{s * a.lo, s * a.hi}
                   : IntervalT<S>{s * a.hi, s * a.lo};
}

template <typename S>
constexpr IntervalT<S> operator*(const IntervalT<S>& a, const IntervalT<S>& b) {
  if (a.is_empty() || b.is_empty()) return IntervalT<S>::empty();
  const S p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min(std::min(p1, p2), std::min(p3, p4)),
          std::max(std::max(p1, p2), std::max(p3, p4))};
}

/// Widen by a nonnegative margin on both sides.
template <typename S>
constexpr IntervalT<S> inflate(const IntervalT<S>& a, S margin) {
  assert(margin >= S(0));
  if (a.is_empty()) return a;
  return {a.lo - margin, a.hi + margin};
}

/// Result of extended division: one component, or two disjoint ones when the
/// denominator straddles zero and the numerator does not contain it.
template <typename S>
struct ExtendedDiv {
  IntervalT<S> first = IntervalT<S>::empty();
  IntervalT<S> second = IntervalT<S>::empty();
  bool has_second = false;
};

/// Extended interval division with unbounded endpoints clamped to `bound`.
/// Division by [0,0] yields empty; a denominator straddling zero with a
/// numerator also containing zero yields the whole clamped domain.
template <typename S>
ExtendedDiv<S> div_extended(const IntervalT<S>& a, const IntervalT<S>& b,
                            S bound = S(kDomainBound)) {
  ExtendedDiv<S> out;
  if (a.is_empty() || b.is_empty()) return out;
  const S inf = bound;
  if (b.lo > S(0) || b.hi < S(0)) {
    const S q1 = a.lo / b.lo, q2 = a.lo / b.hi, q3 = a.hi / b.lo, q4 = a.hi / b.hi;
    out.first = {std::min(std::min(q1, q2), std::min(q3, q4)),
                 std::max(std::max(q1, q2), std::max(q3, q4))};
    out.first.lo = std::max(out.first.lo, -inf);
    out.first.hi = std::min(out.first.hi, inf);
    return out;
  }
  if (b.lo == S(0) && b.hi == S(0)) return out;  // division by [0,0]
  if (a.contains(S(0))) {
    out.first = {-inf, inf};
    return out;
  }
  if (a.lo > S(0)) {
    if (b.lo == S(0)) {
      out.first = {a.lo / b.hi, inf};
    } else if (b.hi == S(0)) {
      out.first = {-inf, a.lo / b.lo};
    } else {
      out.first = {-inf, a.lo / b.lo};
      out.second = {a.lo / b.hi, inf};
      out.has_second = true;
    }
  } else {  // a.hi < 0
    if (b.lo == S(0)) {
      out.first = {-inf, a.hi / b.hi};
    } else if (b.hi == S(0)) {
      out.first = {a.hi / b.lo, inf};
    } else {
      out.first = {-inf, a.hi / b.hi};
      out.second = {a.hi / b.lo, inf};
      out.has_second = true;
    }
  }
  return out;
}

/// Hull of the extended-division components; what the contractors consume.
template <typename S>
IntervalT<S> div_hull(const IntervalT<S>& a, const IntervalT<S>& b,
                      S bound = S(kDomainBound)) {
  const auto d = div_extended(a, b, bound);
  return d.has_second ? hull(d.first, d.second) : d.first;
}

}  // namespace crowdtrack
