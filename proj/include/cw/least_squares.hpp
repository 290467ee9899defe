#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cw/numerics.hpp"
#include "cw/piecewise.hpp"

namespace cw {

struct LeastSquaresResult {
  std::vector<double> coefficients;
  double residual_l2 = 0.0;   // sqrt((1/(b-a)) int residual^2)
  double residual_l1 = 0.0;   // (1/(b-a)) int |residual|
  int dropped_directions = 0; // Gram eigenvalues below the regularization cutoff
};

/// L2 projection of target onto span(basis) over [a,b] with the normalized
/// measure dx/(b-a). The Gram matrix is regularized by dropping eigenvalue
/// directions below 1e-12 * trace, which yields the minimal-norm coefficient
/// vector for (near-)dependent bases. The L1 residual of the projection is
/// reported as a surrogate for the true L1 infimum.
inline LeastSquaresResult l2_least_squares(const PiecewiseFunction& target,
                                           const std::vector<PiecewiseFunction>& basis,
                                           double a, double b) {
  CW_REQUIRE(a < b, "l2_least_squares: empty interval");
  const int n = int(basis.size());
  LeastSquaresResult out;
  const double inv_len = 1.0 / (b - a);

  if (n == 0) {
    out.residual_l2 = std::sqrt(std::max(0.0, integrate_product(target, 0, target, 0, a, b) * inv_len));
    out.residual_l1 = integrate_abs(target, a, b) * inv_len;
    return out;
  }

  Eigen::MatrixXd G(n, n);
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) {
    h(i) = integrate_product(target, 0, basis[i], 0, a, b) * inv_len;
    for (int j = i; j < n; ++j) {
      G(i, j) = integrate_product(basis[i], 0, basis[j], 0, a, b) * inv_len;
      G(j, i) = G(i, j);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double cutoff = 1e-12 * std::max(G.trace(), 0.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double lam = es.eigenvalues()(i);
    if (lam <= cutoff) {
      ++out.dropped_directions;
      continue;
    }
    Eigen::VectorXd q = es.eigenvectors().col(i);
    x += q * (q.dot(h) / lam);
  }
  out.coefficients.assign(x.data(), x.data() + n);

  PiecewiseFunction residual = target;
  for (int i = 0; i < n; ++i)
    residual = linear_combine(1.0, residual, -out.coefficients[i], basis[i]);
  out.residual_l2 = std::sqrt(std::max(0.0, integrate_product(residual, 0, residual, 0, a, b) * inv_len));
  out.residual_l1 = integrate_abs(residual, a, b) * inv_len;
  return out;
}

inline LeastSquaresResult l2_least_squares(const Polynomial& target,
                                           const std::vector<Polynomial>& basis,
                                           double a, double b) {
  std::vector<PiecewiseFunction> pw;
  pw.reserve(basis.size());
  for (const Polynomial& p : basis) pw.push_back(PiecewiseFunction::single(a, b, p));
  return l2_least_squares(PiecewiseFunction::single(a, b, target), pw, a, b);
}

}  // namespace cw
