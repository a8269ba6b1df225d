#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsncbs/rational.hpp"

namespace tsncbs::curves {

struct Point {
  Rational x;
  Rational y;
  bool operator==(const Point&) const = default;
};

/// Continuous, non-negative, non-decreasing piecewise-linear function on [0, inf).
/// Stored as breakpoints (first at x = 0) and the slope after the last one.
class PwlCurve {
 public:
  PwlCurve();

  /// Throws std::invalid_argument unless the result is a valid curve.
  static PwlCurve from_points(std::vector<Point> points, Rational final_slope);

  Rational operator()(const Rational& t) const;

  const std::vector<Point>& points() const { return points_; }
  const Rational& final_slope() const { return final_slope_; }
  /// Slope on the segment starting at breakpoint i.
  Rational slope_after(std::size_t i) const;

  /// t -> f(t + d), d >= 0.
  PwlCurve shift_left(const Rational& d) const;

  /// Two columns t,value with one row per breakpoint plus one tail sample.
  std::string to_csv() const;

  bool operator==(const PwlCurve&) const = default;

 private:
  std::vector<Point> points_;
  Rational final_slope_;
};

/// t -> r*t + b (value b at t = 0).
PwlCurve leaky_bucket(const Rational& rate, const Rational& burst);

/// t -> R*max(0, t - T).
PwlCurve rate_latency(const Rational& rate, const Rational& latency);

PwlCurve operator+(const PwlCurve& a, const PwlCurve& b);
PwlCurve sum(std::span<const PwlCurve> curves);
PwlCurve min(const PwlCurve& a, const PwlCurve& b);

/// (beta - sum(alphas) - c) made non-negative and non-decreasing:
/// g(t) -> max(0, sup_{0<=s<=t} g(s)).
PwlCurve subtract_and_close(const PwlCurve& beta, std::span<const PwlCurve> alphas,
                            const Rational& c);

/// Horizontal deviation: worst-case delay of alpha through beta. nullopt if unbounded.
Bound h_dev(const PwlCurve& alpha, const PwlCurve& beta);

/// Vertical deviation: worst-case backlog. nullopt if unbounded.
Bound v_dev(const PwlCurve& alpha, const PwlCurve& beta);

}  // namespace tsncbs::curves
