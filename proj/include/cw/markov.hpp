#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cw/numerics.hpp"
#include "cw/polynomial.hpp"

namespace cw {

struct MarkovBoundReport {
  double max_derivative = 0.0;  // sup |p'| on [a,b]
  double bound = 0.0;           // 2 deg^2 / (b-a) * sup |p|
  int degree = 0;
  bool pass = true;
};

/// Checks sup|p'| <= 2 m^2/(b-a) sup|p| with the extrema located exactly.
inline MarkovBoundReport markov_bound_check(const Polynomial& p, double a, double b) {
  CW_REQUIRE(a < b, "markov_bound_check: empty interval");
  int deg = std::max(p.degree(1e-14), 1);
  MarkovBoundReport rep;
  rep.degree = deg;
  rep.max_derivative = p.derivative().max_abs_on(a, b);
  rep.bound = 2.0 * double(deg) * double(deg) / (b - a) * p.max_abs_on(a, b);
  rep.pass = rep.max_derivative <= rep.bound * (1.0 + 1e-12) + 1e-300;
  return rep;
}

struct MarkovSubinterval {
  double lo = 0.0, hi = 0.0;
  double min_abs = 0.0;   // min |p| on [lo,hi]
  double max_abs = 0.0;   // sup |p| on [a,b]
  bool degenerate = false;  // p was (numerically) the zero polynomial
};

/// A window of width (b-a)/(4 m^2) on which |p| stays above half its sup,
/// for any p of degree <= m. Candidates anchored at the sup location are
/// guaranteed to qualify; a sliding scan then returns the best verified window.
inline MarkovSubinterval markov_subinterval(const Polynomial& p, double a, double b, int m) {
  CW_REQUIRE(a < b, "markov_subinterval: empty interval");
  CW_REQUIRE(m >= 1, "markov_subinterval: order must be positive");
  MarkovSubinterval out;
  int deg = p.degree(1e-14);
  if (deg < 0) {
    double w = (b - a) / (4.0 * m * m);
    out.lo = a;
    out.hi = a + w;
    out.degenerate = true;
    return out;
  }
  CW_REQUIRE(deg <= m, "markov_subinterval: polynomial degree exceeds stated order");
  const double w = (b - a) / (4.0 * m * m);
  out.max_abs = p.max_abs_on(a, b);

  double xstar = a;
  double best = std::abs(p(a));
  auto consider_point = [&](double x) {
    double vx = std::abs(p(x));
    if (vx > best) {
      best = vx;
      xstar = x;
    }
  };
  consider_point(b);
  for (double r : p.derivative().real_roots_in(a, b, 1e-14 * (b - a)))
    consider_point(r);

  std::vector<double> starts = {std::min(xstar, b - w), std::max(xstar - w, a)};
  int scan = 64 * m * m;
  for (int i = 0; i <= scan; ++i)
    starts.push_back(a + (b - a - w) * double(i) / double(scan));

  double best_min = -1.0;
  for (double t : starts) {
    t = std::clamp(t, a, b - w);
    double mn = p.min_abs_on(t, t + w);
    if (mn > best_min) {
      best_min = mn;
      out.lo = t;
      out.hi = t + w;
      out.min_abs = mn;
    }
  }
  return out;
}

struct NormSummary {
  double sup = 0.0;
  double l1avg = 0.0;   // (1/(b-a)) int |p|
  double l2avg = 0.0;   // sqrt((1/(b-a)) int p^2)
  double chain_constant = 1.0;  // 8 max(deg,1)^2: sup <= chain_constant * l1avg
};

inline NormSummary sup_l1_l2_norms(const Polynomial& p, double a, double b) {
  CW_REQUIRE(a < b, "sup_l1_l2_norms: empty interval");
  NormSummary s;
  int m = std::max(p.degree(1e-14), 1);
  s.sup = p.max_abs_on(a, b);
  s.l1avg = p.integrate_abs(a, b) / (b - a);
  s.l2avg = std::sqrt(std::max(0.0, (p * p).integrate(a, b) / (b - a)));
  s.chain_constant = 8.0 * double(m) * double(m);
  return s;
}

}  // namespace cw
