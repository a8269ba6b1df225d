#include "tsncbs/curves.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tsncbs::curves {

namespace {

/// Unconstrained continuous piecewise-linear function on [0, inf).
struct Pwl {
  std::vector<Point> pts;
  Rational tail;

  Rational slope(std::size_t i) const {
    if (i + 1 < pts.size()) return (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
    return tail;
  }

  std::size_t segment(const Rational& t) const {
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](const Rational& v, const Point& p) { return v < p.x; });
    return static_cast<std::size_t>(it - pts.begin()) - 1;
  }

  Rational eval(const Rational& t) const {
    std::size_t i = segment(t);
    return pts[i].y + slope(i) * (t - pts[i].x);
  }
};

Pwl normalized(Pwl f) {
  std::vector<Point> out;
  out.reserve(f.pts.size());
  for (std::size_t i = 0; i < f.pts.size(); ++i) {
    if (!out.empty() && out.back().x == f.pts[i].x) continue;
    out.push_back(f.pts[i]);
  }
  std::vector<Point> kept;
  kept.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == 0) {
      kept.push_back(out[i]);
      continue;
    }
    const Point& prev = kept.back();
    Rational in = (out[i].y - prev.y) / (out[i].x - prev.x);
    Rational next = i + 1 < out.size() ? (out[i + 1].y - out[i].y) / (out[i + 1].x - out[i].x)
                                       : f.tail;
    if (in != next) kept.push_back(out[i]);
  }
  f.pts = std::move(kept);
  return f;
}

Pwl to_pwl(const PwlCurve& c) { return Pwl{c.points(), c.final_slope()}; }

std::vector<Rational> merged_xs(const Pwl& a, const Pwl& b) {
  std::vector<Rational> xs;
  xs.reserve(a.pts.size() + b.pts.size());
  for (const auto& p : a.pts) xs.push_back(p.x);
  for (const auto& p : b.pts) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

Pwl add(const Pwl& a, const Pwl& b) {
  Pwl r;
  for (const auto& x : merged_xs(a, b)) r.pts.push_back({x, a.eval(x) + b.eval(x)});
  r.tail = a.tail + b.tail;
  return r;
}

Pwl scale(const Pwl& a, const Rational& k) {
  Pwl r = a;
  for (auto& p : r.pts) p.y *= k;
  r.tail *= k;
  return r;
}

Pwl minimum(const Pwl& a, const Pwl& b) {
  std::vector<Rational> xs = merged_xs(a, b);
  std::vector<Rational> all;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.push_back(xs[i]);
    Rational d0 = a.eval(xs[i]) - b.eval(xs[i]);
    if (i + 1 < xs.size()) {
      Rational d1 = a.eval(xs[i + 1]) - b.eval(xs[i + 1]);
      if ((d0 < 0 && d1 > 0) || (d0 > 0 && d1 < 0))
        all.push_back(xs[i] + d0 * (xs[i + 1] - xs[i]) / (d0 - d1));
    } else {
      Rational ds = a.tail - b.tail;
      if ((d0 < 0 && ds > 0) || (d0 > 0 && ds < 0)) all.push_back(xs[i] - d0 / ds);
    }
  }
  Pwl r;
  for (const auto& x : all) r.pts.push_back({x, tsncbs::min(a.eval(x), b.eval(x))});
  const Rational& last = all.back();
  Rational va = a.eval(last), vb = b.eval(last);
  if (va < vb)
    r.tail = a.tail;
  else if (vb < va)
    r.tail = b.tail;
  else
    r.tail = tsncbs::min(a.tail, b.tail);
  return r;
}

/// g -> max(0, running sup of g).
Pwl close_upward(const Pwl& g) {
  Pwl r;
  Rational level = max(Rational(0), g.pts.front().y);
  r.pts.push_back({0, level});
  for (std::size_t i = 0; i + 1 < g.pts.size(); ++i) {
    const Point& p = g.pts[i];
    const Point& q = g.pts[i + 1];
    if (q.y > level) {
      if (p.y < level) {
        Rational xc = p.x + (level - p.y) * (q.x - p.x) / (q.y - p.y);
        r.pts.push_back({xc, level});
      }
      r.pts.push_back(q);
      level = q.y;
    } else {
      r.pts.push_back({q.x, level});
    }
  }
  const Point& last = g.pts.back();
  if (g.tail > 0) {
    if (last.y < level) r.pts.push_back({last.x + (level - last.y) / g.tail, level});
    r.tail = g.tail;
  } else {
    r.tail = 0;
  }
  return r;
}

/// inf{s >= 0 : beta(s) >= y}; nullopt if never reached.
Bound lower_inverse(const Pwl& beta, const Rational& y) {
  if (y <= beta.pts.front().y) return Rational(0);
  for (std::size_t i = 0; i + 1 < beta.pts.size(); ++i) {
    const Point& p = beta.pts[i];
    const Point& q = beta.pts[i + 1];
    if (y <= q.y) return p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
  }
  const Point& last = beta.pts.back();
  if (beta.tail > 0) return last.x + (y - last.y) / beta.tail;
  return std::nullopt;
}

/// sup{s >= 0 : beta(s) <= y}; nullopt if beta never exceeds y.
Bound upper_inverse(const Pwl& beta, const Rational& y) {
  if (y < beta.pts.front().y) return Rational(0);
  for (std::size_t i = 0; i + 1 < beta.pts.size(); ++i) {
    const Point& p = beta.pts[i];
    const Point& q = beta.pts[i + 1];
    if (y < q.y) return p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
  }
  const Point& last = beta.pts.back();
  if (beta.tail > 0) return last.x + (y - last.y) / beta.tail;
  return std::nullopt;
}

bool valid_curve(const Pwl& f) {
  if (f.pts.empty() || f.pts.front().x != 0) return false;
  for (std::size_t i = 0; i < f.pts.size(); ++i) {
    if (f.pts[i].y < 0) return false;
    if (i > 0 && (f.pts[i].x <= f.pts[i - 1].x || f.pts[i].y < f.pts[i - 1].y)) return false;
  }
  return f.tail >= 0;
}

}  // namespace

PwlCurve::PwlCurve() : points_{{0, 0}}, final_slope_(0) {}

PwlCurve PwlCurve::from_points(std::vector<Point> points, Rational final_slope) {
  Pwl f{std::move(points), std::move(final_slope)};
  if (!valid_curve(f))
    throw std::invalid_argument("curve must start at 0 and be non-negative and non-decreasing");
  f = normalized(std::move(f));
  PwlCurve c;
  c.points_ = std::move(f.pts);
  c.final_slope_ = std::move(f.tail);
  return c;
}

Rational PwlCurve::operator()(const Rational& t) const {
  if (t < 0) throw std::invalid_argument("curve evaluated at negative time");
  return to_pwl(*this).eval(t);
}

Rational PwlCurve::slope_after(std::size_t i) const { return to_pwl(*this).slope(i); }

PwlCurve PwlCurve::shift_left(const Rational& d) const {
  if (d < 0) throw std::invalid_argument("negative shift");
  Pwl f = to_pwl(*this);
  Pwl r;
  r.pts.push_back({0, f.eval(d)});
  for (const auto& p : f.pts)
    if (p.x > d) r.pts.push_back({p.x - d, p.y});
  r.tail = f.tail;
  return from_points(std::move(r.pts), std::move(r.tail));
}

std::string PwlCurve::to_csv() const {
  std::ostringstream os;
  os << "t,value\n";
  for (const auto& p : points_) os << to_double(p.x) << ',' << to_double(p.y) << '\n';
  Rational t_end = points_.back().x + (points_.back().x == 0 ? Rational(1) : points_.back().x);
  os << to_double(t_end) << ',' << to_double((*this)(t_end)) << '\n';
  return os.str();
}

PwlCurve leaky_bucket(const Rational& rate, const Rational& burst) {
  if (rate < 0 || burst < 0) throw std::invalid_argument("leaky bucket needs r, b >= 0");
  return PwlCurve::from_points({{0, burst}}, rate);
}

PwlCurve rate_latency(const Rational& rate, const Rational& latency) {
  if (rate < 0 || latency < 0) throw std::invalid_argument("rate-latency needs R, T >= 0");
  if (latency == 0) return PwlCurve::from_points({{0, 0}}, rate);
  return PwlCurve::from_points({{0, 0}, {latency, 0}}, rate);
}

PwlCurve operator+(const PwlCurve& a, const PwlCurve& b) {
  Pwl r = normalized(add(to_pwl(a), to_pwl(b)));
  return PwlCurve::from_points(std::move(r.pts), std::move(r.tail));
}

PwlCurve sum(std::span<const PwlCurve> curves) {
  PwlCurve acc;
  for (const auto& c : curves) acc = acc + c;
  return acc;
}

PwlCurve min(const PwlCurve& a, const PwlCurve& b) {
  Pwl r = normalized(minimum(to_pwl(a), to_pwl(b)));
  return PwlCurve::from_points(std::move(r.pts), std::move(r.tail));
}

PwlCurve subtract_and_close(const PwlCurve& beta, std::span<const PwlCurve> alphas,
                            const Rational& c) {
  Pwl g = to_pwl(beta);
  for (const auto& a : alphas) g = add(g, scale(to_pwl(a), -1));
  for (auto& p : g.pts) p.y -= c;
  Pwl r = normalized(close_upward(normalized(std::move(g))));
  return PwlCurve::from_points(std::move(r.pts), std::move(r.tail));
}

Bound h_dev(const PwlCurve& alpha_curve, const PwlCurve& beta_curve) {
  Pwl alpha = to_pwl(alpha_curve);
  Pwl beta = to_pwl(beta_curve);
  if (alpha.tail > beta.tail) return std::nullopt;

  std::vector<Rational> candidates;
  for (const auto& p : alpha.pts) candidates.push_back(p.x);
  for (const auto& level : beta.pts) {
    for (std::size_t i = 0; i < alpha.pts.size(); ++i) {
      const Point& p = alpha.pts[i];
      Rational s = alpha.slope(i);
      if (s <= 0 || level.y <= p.y) continue;
      Rational t = p.x + (level.y - p.y) / s;
      if (i + 1 < alpha.pts.size() && t >= alpha.pts[i + 1].x) continue;
      candidates.push_back(t);
    }
  }

  Rational best = 0;
  for (const auto& t : candidates) {
    std::size_t seg = alpha.segment(t);
    Rational a = alpha.eval(t);
    Bound inv = alpha.slope(seg) > 0 ? upper_inverse(beta, a) : lower_inverse(beta, a);
    if (!inv) return std::nullopt;
    best = max(best, *inv - t);
  }
  return best;
}

Bound v_dev(const PwlCurve& alpha_curve, const PwlCurve& beta_curve) {
  Pwl alpha = to_pwl(alpha_curve);
  Pwl beta = to_pwl(beta_curve);
  if (alpha.tail > beta.tail) return std::nullopt;
  Rational best = alpha.eval(0) - beta.eval(0);
  for (const auto& x : merged_xs(alpha, beta)) best = max(best, alpha.eval(x) - beta.eval(x));
  return best;
}

}  // namespace tsncbs::curves
