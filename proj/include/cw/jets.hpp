#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cw/compact_set.hpp"
#include "cw/group.hpp"
#include "cw/numerics.hpp"
#include "cw/polynomial.hpp"
#include "cw/trend.hpp"

#include <Eigen/Dense>

namespace cw {

/// One scalar component of a field over a compact set, in one of two
/// representations:
///  - pointwise: a jet (F^0 .. F^m) stored at every knot of the set;
///  - polynomial: one polynomial per part, evaluated in global coordinates.
/// With the polynomial representation jets exist at every point of a part.
class FieldComponent {
 public:
  FieldComponent() = default;

  static FieldComponent pointwise(std::vector<std::vector<double>> jets) {
    FieldComponent c;
    c.pointwise_ = std::move(jets);
    c.is_pointwise_ = true;
    return c;
  }

  static FieldComponent polynomials(std::vector<Polynomial> polys) {
    FieldComponent c;
    c.polys_ = std::move(polys);
    c.is_pointwise_ = false;
    return c;
  }

  bool is_pointwise() const { return is_pointwise_; }
  const std::vector<std::vector<double>>& jets() const { return pointwise_; }
  const std::vector<Polynomial>& polys() const { return polys_; }

 private:
  bool is_pointwise_ = true;
  std::vector<std::vector<double>> pointwise_;
  std::vector<Polynomial> polys_;
};

/// Jet field on a compact set K: r horizontal components and one component
/// per vertical pair (i, j), i > j, in lexicographic pair order. Every
/// component carries jets of order m.
struct WhitneyField {
  int r = 0;
  int m = 1;
  CompactSet K;
  std::vector<FieldComponent> horizontal;  // size r
  std::vector<FieldComponent> vertical;    // size r(r-1)/2

  double location_tolerance() const { return 1e-12 * (K.diameter() + 1.0); }

  /// Index of the knot equal to x (within tolerance); -1 if none.
  int knot_index(double x) const {
    const auto ks = K.knots();
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (std::abs(x - ks[i]) <= location_tolerance()) return static_cast<int>(i);
    return -1;
  }

  std::vector<double> jet_of(const FieldComponent& c, double x) const {
    const std::size_t width = static_cast<std::size_t>(m) + 1;
    if (c.is_pointwise()) {
      const int idx = knot_index(x);
      CW_REQUIRE(idx >= 0, "WhitneyField: jet requested away from every knot");
      CW_REQUIRE(c.jets().size() == K.knots().size(),
                 "WhitneyField: pointwise data does not match the knot count");
      const auto& jet = c.jets()[static_cast<std::size_t>(idx)];
      CW_REQUIRE(jet.size() == width, "WhitneyField: jet has wrong length");
      return jet;
    }
    const int part = K.part_containing(x, location_tolerance());
    CW_REQUIRE(part >= 0, "WhitneyField: jet requested outside the set");
    CW_REQUIRE(c.polys().size() == K.part_count(),
               "WhitneyField: polynomial data does not match the part count");
    const Polynomial& p = c.polys()[static_cast<std::size_t>(part)];
    std::vector<double> jet(width);
    for (std::size_t k = 0; k < width; ++k)
      jet[k] = p.eval_derivative(static_cast<int>(k), x);
    return jet;
  }

  const FieldComponent& component_horizontal(int i) const {
    CW_REQUIRE(i >= 1 && i <= r, "WhitneyField: horizontal index out of range");
    return horizontal[static_cast<std::size_t>(i - 1)];
  }
  const FieldComponent& component_vertical(int i, int j) const {
    return vertical[vertical_pair_index(i, j, r)];
  }

  std::vector<double> jet_horizontal(int i, double x) const {
    return jet_of(component_horizontal(i), x);
  }
  std::vector<double> jet_vertical(int i, int j, double x) const {
    return jet_of(component_vertical(i, j), x);
  }

  Polynomial taylor_horizontal(int i, double a) const {
    return Polynomial::from_taylor(jet_horizontal(i, a), a);
  }
  Polynomial taylor_vertical(int i, int j, double a) const {
    return Polynomial::from_taylor(jet_vertical(i, j, a), a);
  }

  double value_horizontal(int i, double a) const { return jet_horizontal(i, a)[0]; }
  double value_vertical(int i, int j, double a) const { return jet_vertical(i, j, a)[0]; }

  /// Locations where jets are defined for all components: the knots, plus
  /// samples inside the parts when every component is polynomial there.
  std::vector<double> jet_locations(int samples_per_part = 0) const {
    std::vector<double> out = K.knots();
    if (samples_per_part > 0 && !K.is_points()) {
      bool all_poly = true;
      for (const auto& c : horizontal) all_poly = all_poly && !c.is_pointwise();
      for (const auto& c : vertical) all_poly = all_poly && !c.is_pointwise();
      if (all_poly) {
        for (auto& [u, v] : K.interval_list()) {
          if (v <= u) continue;
          for (int s = 1; s <= samples_per_part; ++s)
            out.push_back(u + (v - u) * s / (samples_per_part + 1.0));
        }
        std::sort(out.begin(), out.end());
      }
    }
    return out;
  }
};

/// 1 + the largest jet entry appearing at any knot; the natural scale for
/// relative tolerances on a field.
inline double field_scale(const WhitneyField& f) {
  double s = 1.0;
  for (double x : f.K.knots()) {
    for (int i = 1; i <= f.r; ++i)
      for (double v : f.jet_horizontal(i, x)) s = std::max(s, std::abs(v));
    for (auto [i, j] : vertical_pairs(f.r))
      for (double v : f.jet_vertical(i, j, x)) s = std::max(s, std::abs(v));
  }
  return s;
}

struct RemainderRow {
  std::string component;  // "1".."r" or "21", "31", ...
  int k = 0;
  double a = 0.0, b = 0.0;
  double remainder = 0.0;  // F^k(b) - sum_{l<=m-k} F^{k+l}(a)/l! (b-a)^l
  double scaled = 0.0;     // |remainder| / |b-a|^{m-k}
};

struct RemainderReport {
  std::vector<RemainderRow> rows;
  DyadicSummary summary;  // over the scaled values, keyed by |b-a|
  double max_scaled = 0.0;
  int skipped_degenerate = 0;  // pairs with a == b
};

namespace jetdetail {

inline double taylor_remainder(const std::vector<double>& jet_a, const std::vector<double>& jet_b,
                               int k, int m, double a, double b) {
  double approx = 0.0;
  double pw = 1.0;
  for (int l = 0; l <= m - k; ++l) {
    approx += jet_a[static_cast<std::size_t>(k + l)] / factorial(l) * pw;
    pw *= (b - a);
  }
  return jet_b[static_cast<std::size_t>(k)] - approx;
}

}  // namespace jetdetail

/// Whitney remainders of one component over the given (a, b) pairs, with the
/// scaled value |R| / |b-a|^{m-k} summarized per dyadic separation bucket.
/// Pairs with a == b are skipped and counted.
inline RemainderReport remainder_audit_component(
    const WhitneyField& f, const FieldComponent& comp, const std::string& name,
    const std::vector<std::pair<double, double>>& pairs) {
  RemainderReport rep;
  std::vector<std::pair<double, double>> width_value;
  for (auto [a, b] : pairs) {
    if (a == b) {
      rep.skipped_degenerate += 1;
      continue;
    }
    const auto jet_a = f.jet_of(comp, a);
    const auto jet_b = f.jet_of(comp, b);
    for (int k = 0; k <= f.m; ++k) {
      RemainderRow row;
      row.component = name;
      row.k = k;
      row.a = a;
      row.b = b;
      row.remainder = jetdetail::taylor_remainder(jet_a, jet_b, k, f.m, a, b);
      row.scaled = std::abs(row.remainder) / std::pow(std::abs(b - a), f.m - k);
      rep.max_scaled = std::max(rep.max_scaled, row.scaled);
      width_value.emplace_back(std::abs(b - a), row.scaled);
      rep.rows.push_back(std::move(row));
    }
  }
  rep.summary = summarize_dyadic(width_value);
  return rep;
}

/// Remainder audit of every component over every ordered pair of distinct
/// knots, both directions.
inline RemainderReport remainder_audit(const WhitneyField& f) {
  const auto ks = f.K.knots();
  std::vector<std::pair<double, double>> pairs;
  for (double a : ks)
    for (double b : ks)
      if (a != b) pairs.emplace_back(a, b);

  RemainderReport rep;
  std::vector<std::pair<double, double>> width_value;
  auto absorb = [&](const std::string& name, const FieldComponent& comp) {
    auto part = remainder_audit_component(f, comp, name, pairs);
    rep.max_scaled = std::max(rep.max_scaled, part.max_scaled);
    rep.skipped_degenerate += part.skipped_degenerate;
    for (auto& row : part.rows) {
      width_value.emplace_back(std::abs(row.b - row.a), row.scaled);
      rep.rows.push_back(std::move(row));
    }
  };
  for (int i = 1; i <= f.r; ++i) absorb(std::to_string(i), f.component_horizontal(i));
  for (auto [i, j] : vertical_pairs(f.r))
    absorb(std::to_string(i) + std::to_string(j), f.component_vertical(i, j));
  rep.summary = summarize_dyadic(width_value);
  return rep;
}

struct CompatibilityPair {
  int i = 0, j = 0;
  double max_residual = 0.0;
  double worst_location = 0.0;
  int worst_order = 0;
};

struct CompatibilityReport {
  std::vector<CompatibilityPair> pairs;
  double scale = 1.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Checks that every vertical jet is the pairing of the corresponding
/// horizontal jets: F_ij^k = P^k(F_i, F_j jets) for 1 <= k <= m, at every
/// jet location (knots, plus interior samples on polynomial parts).
inline CompatibilityReport check_horizontal_compatibility(const WhitneyField& f,
                                                          double tol = 1e-10) {
  CompatibilityReport rep;
  rep.scale = field_scale(f);
  rep.tolerance = tol;
  const auto locs = f.jet_locations(2 * f.m + 2);
  for (auto [i, j] : vertical_pairs(f.r)) {
    CompatibilityPair pr;
    pr.i = i;
    pr.j = j;
    for (double x : locs) {
      const auto ji = f.jet_horizontal(i, x);
      const auto jj = f.jet_horizontal(j, x);
      const auto jv = f.jet_vertical(i, j, x);
      for (int k = 1; k <= f.m; ++k) {
        const double want = horizontal_polynomial(k, ji, jj);
        const double res = std::abs(jv[static_cast<std::size_t>(k)] - want);
        if (res > pr.max_residual) {
          pr.max_residual = res;
          pr.worst_location = x;
          pr.worst_order = k;
        }
      }
    }
    rep.pass = rep.pass && pr.max_residual <= tol * rep.scale;
    rep.pairs.push_back(pr);
  }
  return rep;
}

/// The unique polynomial of degree <= 2m+1 matching an order-m jet at each
/// end of [a, b]. Solved in the scaled coordinate s = (x-a)/(b-a) for
/// conditioning, then mapped back to global coordinates.
inline Polynomial hermite_extend_gap(const std::vector<double>& jet_left,
                                     const std::vector<double>& jet_right, double a, double b) {
  CW_REQUIRE(b > a, "hermite_extend_gap: empty interval");
  CW_REQUIRE(jet_left.size() == jet_right.size() && !jet_left.empty(),
             "hermite_extend_gap: jet lengths differ");
  const int m = static_cast<int>(jet_left.size()) - 1;
  const double h = b - a;
  std::vector<double> c(2 * static_cast<std::size_t>(m) + 2, 0.0);

  // Left jet pins the low coefficients directly.
  double hk = 1.0;
  for (int k = 0; k <= m; ++k) {
    c[static_cast<std::size_t>(k)] = jet_left[static_cast<std::size_t>(k)] * hk / factorial(k);
    hk *= h;
  }

  // Right jet determines the top block through an (m+1) x (m+1) solve.
  Eigen::MatrixXd M(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  hk = 1.0;
  for (int k = 0; k <= m; ++k) {
    double partial = 0.0;
    for (int n = k; n <= m; ++n)
      partial += c[static_cast<std::size_t>(n)] * factorial(n) / factorial(n - k);
    rhs(k) = jet_right[static_cast<std::size_t>(k)] * hk - partial;
    for (int n = m + 1; n <= 2 * m + 1; ++n)
      M(k, n - m - 1) = factorial(n) / factorial(n - k);
    hk *= h;
  }
  const Eigen::VectorXd top = M.fullPivLu().solve(rhs);
  for (int n = m + 1; n <= 2 * m + 1; ++n) c[static_cast<std::size_t>(n)] = top(n - m - 1);

  return Polynomial(std::move(c)).compose_affine(1.0 / h, -a / h);
}

}  // namespace cw
