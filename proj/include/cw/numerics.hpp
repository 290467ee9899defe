#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cw {

/// Precondition check; throws std::invalid_argument so callers can reject bad
/// inputs without aborting the process.
#define CW_REQUIRE(cond, msg)                                        \
  do {                                                               \
    if (!(cond)) throw std::invalid_argument(std::string(msg));      \
  } while (0)

inline double sq(double x) { return x * x; }

/// Exact binomial coefficient for the small arguments used here (n <= 60).
inline double binomial(int n, int k) {
  CW_REQUIRE(n >= 0 && k >= 0 && k <= n, "binomial: bad arguments");
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

inline double factorial(int n) {
  CW_REQUIRE(n >= 0, "factorial: negative argument");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= double(i);
  return r;
}

/// 16-point Gauss-Legendre rule on [-1,1]; exact for polynomials of degree <= 31.
struct GaussLegendre16 {
  static const std::vector<double>& nodes() {
    static const std::vector<double> x = {
        -0.98940093499164993260, -0.94457502307323257608,
        -0.86563120238783174388, -0.75540440835500303390,
        -0.61787624440264374845, -0.45801677765722738634,
        -0.28160355077925891323, -0.09501250983763744019,
        0.09501250983763744019,  0.28160355077925891323,
        0.45801677765722738634,  0.61787624440264374845,
        0.75540440835500303390,  0.86563120238783174388,
        0.94457502307323257608,  0.98940093499164993260};
    return x;
  }
  static const std::vector<double>& weights() {
    static const std::vector<double> w = {
        0.02715245941175409485, 0.06225352393864789286,
        0.09515851168249278481, 0.12462897125553387205,
        0.14959598881657673208, 0.16915651939500253819,
        0.18260341504492358887, 0.18945061045506849629,
        0.18945061045506849629, 0.18260341504492358887,
        0.16915651939500253819, 0.14959598881657673208,
        0.12462897125553387205, 0.09515851168249278481,
        0.06225352393864789286, 0.02715245941175409485};
    return w;
  }
};

template <class F>
double gauss16(const F& f, double a, double b) {
  const auto& xs = GaussLegendre16::nodes();
  const auto& ws = GaussLegendre16::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * f(mid + half * xs[i]);
  return s * half;
}

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;  // accumulated |refined - coarse| over accepted panels
  bool converged = true;
};

namespace detail {

template <class F>
double gauss16_scan(const F& f, double a, double b, double& sup) {
  const auto& xs = GaussLegendre16::nodes();
  const auto& ws = GaussLegendre16::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = f(mid + half * xs[i]);
    s += ws[i] * v;
    sup = std::max(sup, std::abs(v));
  }
  return s * half;
}

template <class F>
void adapt_rec(const F& f, double a, double b, double coarse, double abs_tol,
               double rel_tol, int depth, long long& panels_left, double& gsup,
               QuadResult& out) {
  const double mid = 0.5 * (a + b);
  double sup = 0.0;
  const double left = gauss16_scan(f, a, mid, sup);
  const double right = gauss16_scan(f, mid, b, sup);
  gsup = std::max(gsup, sup);
  const double fine = left + right;
  const double err = std::abs(fine - coarse);
  // A sampled rule cannot certify below roundoff of the samples it saw, so a
  // panel is also accepted once err reaches that floor. The floor uses the
  // largest sample seen anywhere in this call: without the global scale, one
  // panel straddling a zero crossing of a large integrand chases its own tiny
  // local values down to the depth cap, dragging the halved tolerances to
  // impossible levels across every sibling on the way.
  const double floor =
      32.0 * std::numeric_limits<double>::epsilon() * gsup * (b - a);
  const double accept = std::max({abs_tol, rel_tol * std::abs(fine), floor});
  --panels_left;
  if (err <= accept || depth >= 40 || panels_left <= 0) {
    out.value += fine;
    out.error_estimate += err;
    if (err > accept) out.converged = false;
    return;
  }
  adapt_rec(f, a, mid, left, 0.5 * abs_tol, rel_tol, depth + 1, panels_left,
            gsup, out);
  adapt_rec(f, mid, b, right, 0.5 * abs_tol, rel_tol, depth + 1, panels_left,
            gsup, out);
}

}  // namespace detail

/// Adaptive bisection with an embedded GL16 rule on each panel.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              double abs_tol = 1e-12, double rel_tol = 1e-12) {
  QuadResult out;
  if (a == b) return out;
  CW_REQUIRE(a < b, "integrate_adaptive: reversed interval");
  long long panels_left = 20000;
  double gsup = 0.0;
  const double coarse = detail::gauss16_scan(f, a, b, gsup);
  detail::adapt_rec(f, a, b, coarse, abs_tol, rel_tol, 0, panels_left, gsup,
                    out);
  return out;
}

}  // namespace cw
