#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "cw/numerics.hpp"

namespace cw {

/// Dense univariate polynomial, coefficients in ascending order of degree.
/// An empty coefficient vector is the zero polynomial.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}
  static Polynomial constant(double v) { return Polynomial({v}); }

  const std::vector<double>& coeffs() const { return c_; }

  /// Degree after ignoring numerically-zero leading coefficients
  /// (relative to the largest coefficient). Zero polynomial reports -1.
  int degree(double rel_cut = 0.0) const {
    double scale = 0.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return -1;
    for (int k = int(c_.size()) - 1; k >= 0; --k)
      if (std::abs(c_[k]) > rel_cut * scale) return k;
    return -1;
  }

  double operator()(double x) const {
    double r = 0.0;
    for (int k = int(c_.size()) - 1; k >= 0; --k) r = r * x + c_[k];
    return r;
  }

  /// k-th derivative value at x, via Horner on the differentiated coefficients.
  double eval_derivative(int k, double x) const {
    CW_REQUIRE(k >= 0, "Polynomial::eval_derivative: negative order");
    if (k >= int(c_.size())) return 0.0;
    double r = 0.0;
    for (int d = int(c_.size()) - 1; d >= k; --d) {
      double f = 1.0;
      for (int i = 0; i < k; ++i) f *= double(d - i);
      r = r * x + c_[d] * f;
    }
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * double(k);
    return Polynomial(std::move(d));
  }

  Polynomial antiderivative() const {
    if (c_.empty()) return Polynomial();
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / double(k + 1);
    return Polynomial(std::move(a));
  }

  double integrate(double a, double b) const {
    Polynomial anti = antiderivative();
    return anti(b) - anti(a);
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return Polynomial();
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(double s, Polynomial p) {
    for (double& v : p.c_) v *= s;
    return p;
  }

  /// Returns q with q(x) = p(c1*x + c0).
  Polynomial compose_affine(double c1, double c0) const {
    Polynomial r;
    Polynomial lin({c0, c1});
    for (int k = int(c_.size()) - 1; k >= 0; --k) {
      r = r * lin;
      r += Polynomial::constant(c_[k]);
    }
    return r;
  }

  /// Taylor polynomial with the given derivative values at the point a:
  /// sum_k jet[k]/k! (x-a)^k, expanded in the monomial basis.
  static Polynomial from_taylor(const std::vector<double>& jet, double a) {
    std::vector<double> q(jet.size());
    for (std::size_t k = 0; k < jet.size(); ++k) q[k] = jet[k] / factorial(int(k));
    return Polynomial(std::move(q)).compose_affine(1.0, -a);
  }

  /// Real roots inside [a,b], by companion-matrix eigenvalues with Newton
  /// polishing; roots closer together than cluster_tol are merged.
  std::vector<double> real_roots_in(double a, double b,
                                    double cluster_tol = -1.0) const {
    if (cluster_tol < 0.0) cluster_tol = 1e-12 * (b - a + 1.0);
    std::vector<double> roots;
    int deg = degree(1e-14);
    if (deg <= 0) return roots;
    if (deg == 1) {
      double r = -c_[0] / c_[1];
      if (r >= a - cluster_tol && r <= b + cluster_tol)
        roots.push_back(std::clamp(r, a, b));
      return roots;
    }
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -c_[i] / c_[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, /*computeEigenvectors=*/false);
    Polynomial d = derivative();
    for (int i = 0; i < deg; ++i) {
      std::complex<double> z = es.eigenvalues()[i];
      if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z.real()))) continue;
      double x = z.real();
      for (int it = 0; it < 3; ++it) {
        double dv = d(x);
        if (dv == 0.0) break;
        double step = (*this)(x) / dv;
        if (!std::isfinite(step)) break;
        x -= step;
      }
      if (x >= a - cluster_tol && x <= b + cluster_tol)
        roots.push_back(std::clamp(x, a, b));
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> merged;
    for (double r : roots)
      if (merged.empty() || r - merged.back() > cluster_tol) merged.push_back(r);
    return merged;
  }

  /// max over [a,b] of |p|, located exactly through critical points.
  double max_abs_on(double a, double b) const {
    double m = std::max(std::abs((*this)(a)), std::abs((*this)(b)));
    for (double r : derivative().real_roots_in(a, b, 1e-14 * (b - a + 1.0)))
      m = std::max(m, std::abs((*this)(r)));
    return m;
  }

  /// min over [a,b] of |p| (zero if a sign change or root lies inside).
  double min_abs_on(double a, double b) const {
    double m = std::min(std::abs((*this)(a)), std::abs((*this)(b)));
    for (double r : derivative().real_roots_in(a, b, 1e-14 * (b - a + 1.0)))
      m = std::min(m, std::abs((*this)(r)));
    for (double r : real_roots_in(a, b, 1e-14 * (b - a + 1.0)))
      m = std::min(m, std::abs((*this)(r)));
    return m;
  }

  /// Integral of |p| over [a,b]: split at sign changes, integrate exactly.
  double integrate_abs(double a, double b) const {
    if (a == b) return 0.0;
    CW_REQUIRE(a < b, "Polynomial::integrate_abs: reversed interval");
    std::vector<double> cuts = real_roots_in(a, b, 1e-12 * (b - a));
    double total = 0.0, left = a;
    Polynomial anti = antiderivative();
    for (std::size_t i = 0; i <= cuts.size(); ++i) {
      double right = (i < cuts.size()) ? cuts[i] : b;
      if (right > left) total += std::abs(anti(right) - anti(left));
      left = right;
    }
    return total;
  }

 private:
  std::vector<double> c_;
};

}  // namespace cw
