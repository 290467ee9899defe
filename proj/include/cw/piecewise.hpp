#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cw/bump.hpp"
#include "cw/numerics.hpp"
#include "cw/polynomial.hpp"

namespace cw {

/// Piecewise polynomial on a breakpoint grid, plus a list of smooth bump
/// terms. Every evaluation (any derivative order up to the bump table limit)
/// is closed-form; no numerical differentiation happens here.
class PiecewiseFunction {
 public:
  PiecewiseFunction() = default;

  PiecewiseFunction(std::vector<double> breakpoints, std::vector<Polynomial> pieces)
      : bp_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    CW_REQUIRE(bp_.size() >= 2, "PiecewiseFunction: need at least one piece");
    CW_REQUIRE(pieces_.size() + 1 == bp_.size(),
               "PiecewiseFunction: piece/breakpoint count mismatch");
    for (std::size_t i = 0; i + 1 < bp_.size(); ++i)
      CW_REQUIRE(bp_[i] < bp_[i + 1], "PiecewiseFunction: breakpoints not increasing");
  }

  static PiecewiseFunction single(double a, double b, Polynomial p) {
    return PiecewiseFunction({a, b}, {std::move(p)});
  }
  static PiecewiseFunction zero(double a, double b) {
    return single(a, b, Polynomial());
  }

  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }
  const std::vector<BumpTerm>& bumps() const { return bumps_; }
  double domain_lo() const { return bp_.front(); }
  double domain_hi() const { return bp_.back(); }

  void add_bump(BumpTerm b) {
    CW_REQUIRE(b.u >= domain_lo() - 1e-12 && b.v <= domain_hi() + 1e-12,
               "PiecewiseFunction: bump outside domain");
    auto it = std::upper_bound(bumps_.begin(), bumps_.end(), b,
                               [](const BumpTerm& x, const BumpTerm& y) { return x.u < y.u; });
    bumps_.insert(it, b);
    rebuild_prefix();
  }

  /// Index of the piece owning x (right-continuous; the last point belongs
  /// to the last piece).
  int piece_index(double x) const {
    int i = int(std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin()) - 1;
    return std::clamp(i, 0, int(pieces_.size()) - 1);
  }

  double operator()(double x) const { return eval_derivative(0, x); }

  double eval_derivative(int k, double x) const {
    double r = pieces_[piece_index(x)].eval_derivative(k, x);
    return r + bump_sum(k, x);
  }

  /// One-sided evaluation for knot diagnostics: side < 0 takes the piece to
  /// the left of x, side > 0 the piece to the right.
  double eval_derivative_side(int k, double x, int side) const {
    int i;
    if (side < 0) {
      i = int(std::lower_bound(bp_.begin(), bp_.end(), x) - bp_.begin()) - 1;
    } else {
      i = int(std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin()) - 1;
    }
    i = std::clamp(i, 0, int(pieces_.size()) - 1);
    return pieces_[i].eval_derivative(k, x) + bump_sum(k, x);
  }

  /// Sorted cut points within (a,b): piece breakpoints and bump support
  /// endpoints. Integration segments between consecutive cuts are either
  /// purely polynomial or carry a fixed set of bumps.
  std::vector<double> cuts_in(double a, double b) const {
    std::vector<double> cs;
    for (double t : bp_)
      if (t > a && t < b) cs.push_back(t);
    for (const BumpTerm& t : bumps_) {
      if (t.u > a && t.u < b) cs.push_back(t.u);
      if (t.v > a && t.v < b) cs.push_back(t.v);
    }
    return cs;
  }

  bool has_bump_on(double a, double b) const {
    for (const BumpTerm& t : bumps_)
      if (t.u < b && t.v > a) return true;
    return false;
  }

  /// Local polynomial part on a segment known to lie inside one piece.
  const Polynomial& piece_on(double a, double b) const {
    return pieces_[piece_index(0.5 * (a + b))];
  }

 private:
  void rebuild_prefix() {
    prefix_max_v_.resize(bumps_.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bumps_.size(); ++i) {
      mx = std::max(mx, bumps_[i].v);
      prefix_max_v_[i] = mx;
    }
  }

  double bump_sum(int k, double x) const {
    if (bumps_.empty()) return 0.0;
    BumpTerm probe;
    probe.u = x;
    int i = int(std::upper_bound(bumps_.begin(), bumps_.end(), probe,
                                 [](const BumpTerm& a, const BumpTerm& b) { return a.u < b.u; }) -
                bumps_.begin()) -
            1;
    double r = 0.0;
    for (; i >= 0 && prefix_max_v_[i] > x; --i)
      if (bumps_[i].contains(x)) r += bumps_[i].eval_derivative(k, x);
    return r;
  }

  std::vector<double> bp_;
  std::vector<Polynomial> pieces_;
  std::vector<BumpTerm> bumps_;
  std::vector<double> prefix_max_v_;
};

namespace pwdetail {

inline std::vector<double> merged_segments(const PiecewiseFunction& f,
                                           const PiecewiseFunction* g, double a,
                                           double b) {
  std::vector<double> cs = f.cuts_in(a, b);
  if (g) {
    auto more = g->cuts_in(a, b);
    cs.insert(cs.end(), more.begin(), more.end());
  }
  cs.push_back(a);
  cs.push_back(b);
  std::sort(cs.begin(), cs.end());
  const double eps = 1e-14 * (std::abs(b - a) + 1.0);
  std::vector<double> out;
  for (double t : cs)
    if (out.empty() || t - out.back() > eps) out.push_back(t);
  out.back() = b;
  out.front() = a;
  return out;
}

/// Collects the bumps of f meeting (u,v), requiring each to cover exactly
/// [u,v] (bump edges are cut points, so this is the generic situation).
/// A partial overlap disqualifies the segment from the closed-form route.
inline bool segment_bumps(const PiecewiseFunction& f, double u, double v,
                          double ctol, std::vector<const BumpTerm*>& out) {
  for (const BumpTerm& t : f.bumps()) {
    if (t.v <= u + ctol || t.u >= v - ctol) continue;
    if (std::abs(t.u - u) <= ctol && std::abs(t.v - v) <= ctol) {
      out.push_back(&t);
      continue;
    }
    return false;
  }
  return true;
}

/// Closed form for int over [u,v] of D^{kf}(p + bumps_f) * D^{kg}(q + bumps_g)
/// when every bump's support is exactly [u,v] and kf, kg <= 1: poly-profile
/// terms reduce to the tabulated power moments, profile-profile terms to the
/// tabulated pairing constants. Large amplitudes stay exact here where
/// sampled quadrature would be left chasing impossible relative accuracy.
inline bool segment_product_exact(const Polynomial& p,
                                  const std::vector<const BumpTerm*>& bf, int kf,
                                  const Polynomial& q,
                                  const std::vector<const BumpTerm*>& bg, int kg,
                                  double u, double v, double& out) {
  if (kf > 1 || kg > 1) return false;
  const double h = v - u;
  Polynomial pk = p;
  for (int k = 0; k < kf; ++k) pk = pk.derivative();
  Polynomial qk = q;
  for (int k = 0; k < kg; ++k) qk = qk.derivative();
  auto poly_profile = [&](const Polynomial& w, const BumpTerm& t, int deriv,
                          double& term) {
    const auto& M = profile_power_moments(t.kind, deriv);
    const Polynomial unit = w.compose_affine(h, u);
    const auto& c = unit.coeffs();
    if (c.size() > M.size()) return false;
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * M[j];
    term = t.amplitude * (deriv == 0 ? h : 1.0) * s;
    return true;
  };
  double acc = (pk * qk).integrate(u, v);
  double term = 0.0;
  for (const BumpTerm* t : bf) {
    if (!poly_profile(qk, *t, kf, term)) return false;
    acc += term;
  }
  for (const BumpTerm* t : bg) {
    if (!poly_profile(pk, *t, kg, term)) return false;
    acc += term;
  }
  for (const BumpTerm* tf : bf)
    for (const BumpTerm* tg : bg)
      acc += tf->amplitude * tg->amplitude * std::pow(h, 1 - kf - kg) *
             cross_profile_moment(tf->kind, kf, tg->kind, kg);
  out = acc;
  return true;
}

}  // namespace pwdetail

/// Integral over [a,b] of D^{kf} f * D^{kg} g. Polynomial-only segments and
/// whole-slot bump segments are integrated in closed form; only segments that
/// cut through a bump interior (or derivative orders past the tables) fall
/// back to adaptive quadrature.
inline double integrate_product(const PiecewiseFunction& f, int kf,
                                const PiecewiseFunction& g, int kg, double a,
                                double b, double tol = 1e-12) {
  if (a == b) return 0.0;
  CW_REQUIRE(a < b, "integrate_product: reversed interval");
  std::vector<double> seg = pwdetail::merged_segments(f, &g, a, b);
  double total = 0.0;
  const double seg_tol = std::max(tol / double(seg.size()), 1e-15);
  const double ctol = 2e-14 * (std::abs(b - a) + 1.0);
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
    double u = seg[i], v = seg[i + 1];
    if (!(v > u)) continue;
    if (!f.has_bump_on(u, v) && !g.has_bump_on(u, v)) {
      Polynomial p = f.piece_on(u, v);
      Polynomial q = g.piece_on(u, v);
      for (int k = 0; k < kf; ++k) p = p.derivative();
      for (int k = 0; k < kg; ++k) q = q.derivative();
      total += (p * q).integrate(u, v);
      continue;
    }
    std::vector<const BumpTerm*> bf, bg;
    double exact = 0.0;
    if (pwdetail::segment_bumps(f, u, v, ctol, bf) &&
        pwdetail::segment_bumps(g, u, v, ctol, bg) &&
        pwdetail::segment_product_exact(f.piece_on(u, v), bf, kf,
                                        g.piece_on(u, v), bg, kg, u, v,
                                        exact)) {
      total += exact;
    } else {
      total += integrate_adaptive(
                   [&](double x) {
                     return f.eval_derivative(kf, x) * g.eval_derivative(kg, x);
                   },
                   u, v, seg_tol, 1e-12)
                   .value;
    }
  }
  return total;
}

/// Integral over [a,b] of |f|.
inline double integrate_abs(const PiecewiseFunction& f, double a, double b,
                            double tol = 1e-10) {
  if (a == b) return 0.0;
  CW_REQUIRE(a < b, "integrate_abs: reversed interval");
  std::vector<double> seg = pwdetail::merged_segments(f, nullptr, a, b);
  double total = 0.0;
  const double seg_tol = tol / double(seg.size());
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
    double u = seg[i], v = seg[i + 1];
    if (!(v > u)) continue;
    if (!f.has_bump_on(u, v)) {
      total += f.piece_on(u, v).integrate_abs(u, v);
    } else {
      total += integrate_adaptive(
                   [&](double x) { return std::abs(f.eval_derivative(0, x)); },
                   u, v, seg_tol, 1e-10)
                   .value;
    }
  }
  return total;
}

/// Signed-area integrand between two components: (1/2) int_a^b (fi fj' - fi' fj).
inline double signed_area(const PiecewiseFunction& fi, const PiecewiseFunction& fj,
                          double a, double b, double tol = 1e-12) {
  return 0.5 * (integrate_product(fi, 0, fj, 1, a, b, tol) -
                integrate_product(fi, 1, fj, 0, a, b, tol));
}

/// alpha*f + beta*g on a shared domain.
inline PiecewiseFunction linear_combine(double alpha, const PiecewiseFunction& f,
                                        double beta, const PiecewiseFunction& g) {
  CW_REQUIRE(std::abs(f.domain_lo() - g.domain_lo()) < 1e-12 &&
                 std::abs(f.domain_hi() - g.domain_hi()) < 1e-12,
             "linear_combine: domain mismatch");
  std::vector<double> bp = pwdetail::merged_segments(f, &g, f.domain_lo(), f.domain_hi());
  std::vector<Polynomial> pieces;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    Polynomial p = alpha * f.piece_on(bp[i], bp[i + 1]);
    p += beta * g.piece_on(bp[i], bp[i + 1]);
    pieces.push_back(std::move(p));
  }
  PiecewiseFunction out(std::move(bp), std::move(pieces));
  for (BumpTerm t : f.bumps()) {
    t.amplitude *= alpha;
    out.add_bump(t);
  }
  for (BumpTerm t : g.bumps()) {
    t.amplitude *= beta;
    out.add_bump(t);
  }
  return out;
}

}  // namespace cw
