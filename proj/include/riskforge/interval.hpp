#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace riskforge {

/// Closed range [lo, hi] over the reals. Point values have lo == hi.
///
/// Frequencies, consequences, likelihoods, effects and dependencies all use
/// this type; the arithmetic below is the endpoint-wise lift of the point
/// rules and assumes nonnegative operands where noted.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr Interval point(double v) noexcept { return {v, v}; }
  static constexpr Interval zero() noexcept { return {0.0, 0.0}; }
  static constexpr Interval one() noexcept { return {1.0, 1.0}; }

  constexpr bool is_point() const noexcept { return lo == hi; }
  constexpr bool well_formed() const noexcept { return lo <= hi; }
  bool finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
  constexpr double mid() const noexcept { return lo == hi ? lo : lo + (hi - lo) / 2.0; }
  constexpr double width() const noexcept { return hi - lo; }

  constexpr bool contains(double v) const noexcept { return lo <= v && v <= hi; }
  constexpr bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }
  constexpr bool within_unit() const noexcept { return lo >= 0.0 && hi <= 1.0; }

  /// 1 - x lifted to intervals; maps an effect to its residual factor.
  constexpr Interval complement() const noexcept { return {1.0 - hi, 1.0 - lo}; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(const Interval& a, const Interval& b) noexcept {
  return {a.lo + b.lo, a.hi + b.hi};
}

/// General interval product (min/max over the endpoint products).
inline Interval operator*(const Interval& a, const Interval& b) noexcept {
  if (a.lo >= 0.0 && b.lo >= 0.0) return {a.lo * b.lo, a.hi * b.hi};
  const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(std::begin(p), std::end(p)),
          *std::max_element(std::begin(p), std::end(p))};
}

namespace detail {

template <class Op>
double sorted_fold(std::vector<double> values, double init, Op op) {
  std::sort(values.begin(), values.end());
  for (double v : values) init = op(init, v);
  return init;
}

}  // namespace detail

// The folds below sort each endpoint sequence before accumulating. The result
// then depends only on the multiset of operands (bit-for-bit), and because
// sorting preserves element-wise dominance and IEEE rounding is monotone, the
// folds stay monotone in every operand.

/// Sum of nonnegative intervals; empty input yields [0,0].
inline Interval sum_nonneg(std::span<const Interval> xs) {
  std::vector<double> los, his;
  los.reserve(xs.size());
  his.reserve(xs.size());
  for (const auto& x : xs) {
    los.push_back(x.lo);
    his.push_back(x.hi);
  }
  auto add = [](double a, double b) { return a + b; };
  return {detail::sorted_fold(std::move(los), 0.0, add),
          detail::sorted_fold(std::move(his), 0.0, add)};
}

/// Product of nonnegative intervals; empty input yields [1,1].
inline Interval product_nonneg(std::span<const Interval> xs) {
  std::vector<double> los, his;
  los.reserve(xs.size());
  his.reserve(xs.size());
  for (const auto& x : xs) {
    los.push_back(x.lo);
    his.push_back(x.hi);
  }
  auto mul = [](double a, double b) { return a * b; };
  return {detail::sorted_fold(std::move(los), 1.0, mul),
          detail::sorted_fold(std::move(his), 1.0, mul)};
}

/// Relative closeness used for equality of exclusive contributions.
inline bool nearly_equal(double a, double b, double rel_tol) noexcept {
  if (a == b) return true;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace riskforge
