#include <doctest.h>

#include <random>

#include "tsncbs/curves.hpp"

using namespace tsncbs;
using namespace tsncbs::curves;

namespace {

Rational q(long n, long d = 1) { return ratio(n, d); }

/// Random concave curve: min of a few leaky buckets.
PwlCurve random_concave(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> rate(1, 50), burst(0, 400);
  PwlCurve c = leaky_bucket(q(rate(rng)), q(burst(rng)));
  for (int i = 0; i < 2; ++i) c = min(c, leaky_bucket(q(rate(rng)), q(burst(rng))));
  return c;
}

/// Random convex curve: max-plus shape built from points with increasing slopes.
PwlCurve random_convex(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> step(1, 20), slope(1, 30);
  std::vector<Point> pts{{0, 0}};
  Rational x = step(rng), s = 0;
  pts.push_back({x, 0});
  for (int i = 0; i < 2; ++i) {
    s += slope(rng);
    Rational nx = x + step(rng);
    pts.push_back({nx, pts.back().y + s * (nx - x)});
    x = nx;
  }
  return PwlCurve::from_points(pts, s + slope(rng));
}

}  // namespace

TEST_CASE("rational parsing and formatting") {
  CHECK(parse_rational("12") == 12);
  CHECK(parse_rational("-0.075") == q(-3, 40));
  CHECK(parse_rational("14.4e6") == 14400000);
  CHECK(parse_rational("1/3") == q(1, 3));
  CHECK(parse_rational("2.5E-3") == q(1, 400));
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK(from_double(0.1) == q(1, 10));
  CHECK(from_double(14.4) == q(72, 5));
  CHECK(to_fixed(q(2, 3), 3) == "0.667");
  CHECK(to_fixed(q(-2, 3), 2) == "-0.67");
  CHECK(to_fixed(q(5, 2), 0) == "3");
  CHECK(to_fixed(Bound(), 2) == "inf");
  CHECK(ceil_to_grid(q(1, 3), 1024) == q(342, 1024));
  CHECK(ceil_to_grid(q(5), 1024) == 5);
  CHECK(floor_int(q(-1, 2)) == -1);
  CHECK(ceil_int(q(1, 2)) == 1);
}

TEST_CASE("leaky bucket and rate latency evaluate as defined") {
  auto a = leaky_bucket(q(3), q(7));
  CHECK(a(0) == 7);
  CHECK(a(q(5, 2)) == q(29, 2));
  auto b = rate_latency(q(4), q(2));
  CHECK(b(0) == 0);
  CHECK(b(2) == 0);
  CHECK(b(5) == 12);
  CHECK(rate_latency(q(4), q(0)) == leaky_bucket(q(4), q(0)));
}

TEST_CASE("from_points rejects invalid curves") {
  CHECK_THROWS_AS(PwlCurve::from_points({{1, 0}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(PwlCurve::from_points({{0, 2}, {1, 1}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(PwlCurve::from_points({{0, 0}}, -1), std::invalid_argument);
  CHECK_THROWS_AS(PwlCurve::from_points({{0, -1}}, 1), std::invalid_argument);
  CHECK_NOTHROW(PwlCurve::from_points({{0, 0}, {1, 1}, {2, 2}}, 1));
}

TEST_CASE("deviations of a leaky bucket through a rate-latency curve") {
  auto alpha = leaky_bucket(q(2), q(10));
  auto beta = rate_latency(q(5), q(3));
  CHECK(h_dev(alpha, beta) == Bound(q(10, 5) + 3));
  CHECK(v_dev(alpha, beta) == Bound(q(10) + 2 * 3));
  CHECK_FALSE(h_dev(leaky_bucket(q(6), q(1)), beta).has_value());
  CHECK_FALSE(v_dev(leaky_bucket(q(6), q(1)), beta).has_value());
  CHECK(h_dev(leaky_bucket(q(5), q(0)), beta) == Bound(q(3)));
  CHECK(h_dev(PwlCurve(), beta) == Bound(q(0)));
}

TEST_CASE("closed forms hold on random pairs") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long> n(0, 1000), d(1, 97);
  for (int i = 0; i < 300; ++i) {
    Rational r = ratio(n(rng), d(rng)), b = ratio(n(rng), d(rng)), T = ratio(n(rng), d(rng));
    Rational R = r + ratio(n(rng) + 1, d(rng));
    auto alpha = leaky_bucket(r, b);
    auto beta = rate_latency(R, T);
    REQUIRE(h_dev(alpha, beta) == Bound(b / R + T));
    REQUIRE(v_dev(alpha, beta) == Bound(b + r * T));
  }
}

TEST_CASE("min, sum and shift of leaky buckets") {
  auto a = leaky_bucket(q(10), q(0));
  auto b = leaky_bucket(q(2), q(8));
  auto m = min(a, b);
  CHECK(m.points() == std::vector<Point>{{0, 0}, {1, 10}});
  CHECK(m.final_slope() == 2);
  CHECK(m(3) == 14);
  auto s = a + b;
  CHECK(s == leaky_bucket(q(12), q(8)));
  std::vector<PwlCurve> none;
  CHECK(sum(none) == PwlCurve());
  CHECK(b.shift_left(q(3)) == leaky_bucket(q(2), q(14)));
  CHECK(m.shift_left(q(1, 2)) == PwlCurve::from_points({{0, 5}, {q(1, 2), 10}}, 2));
}

TEST_CASE("subtract_and_close of a line minus a leaky bucket is rate-latency") {
  auto beta = leaky_bucket(q(100), q(0));
  std::vector<PwlCurve> higher{leaky_bucket(q(30), q(140))};
  auto left = subtract_and_close(beta, higher, q(70));
  CHECK(left == rate_latency(q(70), q(3)));
  std::vector<PwlCurve> saturating{leaky_bucket(q(120), q(1))};
  auto dead = subtract_and_close(beta, saturating, 0);
  CHECK(dead(1000) == 0);
}

TEST_CASE("subtract_and_close keeps the running maximum") {
  auto beta = rate_latency(q(10), q(1));
  std::vector<PwlCurve> higher{min(leaky_bucket(q(20), q(0)), leaky_bucket(q(1), q(19)))};
  auto left = subtract_and_close(beta, higher, 0);
  for (long t = 0; t <= 40; ++t) {
    Rational g = beta(q(t)) - higher[0](q(t));
    CHECK(left(q(t)) >= max(Rational(0), g));
    CHECK(left(q(t + 1)) >= left(q(t)));
  }
  CHECK(left(40) == 10 * 39 - (19 + 40));
}

TEST_CASE("curve algebra properties on random curves") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto a = random_concave(rng), b = random_concave(rng), beta = random_convex(rng);
    auto m = min(a, b), s = a + b;
    std::vector<PwlCurve> higher{a};
    auto left = subtract_and_close(beta, higher, q(3));
    for (long k = 0; k <= 60; ++k) {
      Rational t = ratio(k, 2);
      REQUIRE(m(t) == tsncbs::min(a(t), b(t)));
      REQUIRE(s(t) == a(t) + b(t));
      REQUIRE(left(t) >= 0);
      REQUIRE(left(t) >= beta(t) - a(t) - 3);
      if (k > 0) REQUIRE(left(t) >= left(ratio(k - 1, 2)));
    }
    auto h = h_dev(a, beta);
    auto v = v_dev(a, beta);
    REQUIRE(h.has_value() == v.has_value());
    if (h) {
      REQUIRE(*h >= 0);
      REQUIRE(beta(*h) >= a(0));
      auto bigger = h_dev(a + leaky_bucket(0, q(5)), beta);
      REQUIRE(bigger);
      REQUIRE(*bigger >= *h);
    }
  }
}

TEST_CASE("csv export lists breakpoints") {
  auto c = min(leaky_bucket(q(10), q(0)), leaky_bucket(q(2), q(8)));
  std::string csv = c.to_csv();
  CHECK(csv.find("t,value") == 0);
  CHECK(csv.find("1,10") != std::string::npos);
}
