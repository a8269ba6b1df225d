#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace tsncbs {

/// Exact arithmetic type used for every time, rate and size.
using Rational = mpq_class;

/// A quantity that may be unbounded; nullopt means +infinity.
using Bound = std::optional<Rational>;

/// n / d in canonical form; d must be non-zero.
Rational ratio(const mpz_class& n, const mpz_class& d);

/// Parses "12", "-0.075", "14.4e6", "1/3" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Exact value of the shortest decimal that round-trips to `v`.
Rational from_double(double v);

double to_double(const Rational& q);

mpz_class floor_int(const Rational& q);
mpz_class ceil_int(const Rational& q);

/// Rounds up to the grid 1/denominator.
Rational ceil_to_grid(const Rational& q, unsigned long denominator);

/// Fixed-point decimal text with `digits` fractional digits, rounded half up.
std::string to_fixed(const Rational& q, int digits);

/// Same as to_fixed but "inf" for an unbounded value.
std::string to_fixed(const Bound& q, int digits);

inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }

/// Scaling constants between internal SI units and I/O units.
inline const Rational kMicro{1, 1000000};

inline Rational seconds_from_us(const Rational& us) { return us * kMicro; }
inline Rational us_from_seconds(const Rational& s) { return s * 1000000; }

}  // namespace tsncbs
