#include "tsncbs/rational.hpp"

#include <charconv>
#include <cctype>
#include <stdexcept>

namespace tsncbs {

namespace {

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  auto bad = [&] { return std::invalid_argument("not a number: '" + std::string(text) + "'"); };
  if (s.empty()) throw bad();

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw bad();
    Rational q = num / den;
    q.canonicalize();
    return q;
  }

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = s.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6) throw bad();
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string digits;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) ||
        (ip.empty() && fp.empty()))
      throw bad();
    digits = std::string(ip) + std::string(fp);
    exponent -= static_cast<long>(fp.size());
  } else {
    if (!all_digits(s)) throw bad();
    digits = std::string(s);
  }
  Rational q{mpz_class(digits, 10)};
  if (exponent > 0)
    q *= pow10(static_cast<unsigned long>(exponent));
  else if (exponent < 0)
    q /= pow10(static_cast<unsigned long>(-exponent));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

Rational from_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw std::invalid_argument("unrepresentable number");
  std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
  if (text == "inf" || text == "-inf" || text == "nan" || text == "-nan")
    throw std::invalid_argument("non-finite number");
  return parse_rational(text);
}

double to_double(const Rational& q) { return q.get_d(); }

mpz_class floor_int(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

mpz_class ceil_int(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Rational ceil_to_grid(const Rational& q, unsigned long denominator) {
  Rational scaled = q * denominator;
  Rational r{ceil_int(scaled), mpz_class(denominator)};
  r.canonicalize();
  return r;
}

std::string to_fixed(const Rational& q, int digits) {
  mpz_class scale = pow10(static_cast<unsigned long>(digits));
  Rational scaled = abs(q) * scale + Rational(1, 2);
  mpz_class n = floor_int(scaled);
  std::string s = n.get_str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits))
      s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  if (q < 0 && n != 0) s.insert(0, "-");
  return s;
}

std::string to_fixed(const Bound& q, int digits) {
  return q ? to_fixed(*q, digits) : std::string("inf");
}

Rational ratio(const mpz_class& n, const mpz_class& d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

}  // namespace tsncbs
