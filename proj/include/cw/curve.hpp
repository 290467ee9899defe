#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cw/group.hpp"
#include "cw/piecewise.hpp"

namespace cw {

/// Absolutely continuous curve into the step-2 group: r horizontal components
/// plus one vertical component per pair (i,j). Vertical components live on the
/// same knot grid as the horizontal ones; each knot interval is either an
/// explicit polynomial or a "lifted" interval whose value is
///   offset + (1/2) int_{lo}^t (f_i f_j' - f_i' f_j),
/// evaluated against the curve's own horizontal components. Derivatives of
/// lifted intervals come from the bilinear derivative form, never from
/// numerical differentiation.
class HorizontalCurve {
 public:
  struct VerticalPiece {
    bool lifted = true;
    double offset = 0.0;  // value at the left end of the piece (lifted case)
    Polynomial poly;      // used when !lifted
  };

  HorizontalCurve() = default;
  HorizontalCurve(int r, int m, std::vector<double> knots,
                  std::vector<PiecewiseFunction> horizontal,
                  std::vector<std::vector<VerticalPiece>> vertical)
      : r_(r), m_(m), knots_(std::move(knots)), horiz_(std::move(horizontal)),
        vert_(std::move(vertical)) {
    CW_REQUIRE(r_ >= 2, "HorizontalCurve: need r >= 2");
    CW_REQUIRE(m_ >= 1, "HorizontalCurve: need m >= 1");
    CW_REQUIRE(knots_.size() >= 2, "HorizontalCurve: need at least one interval");
    CW_REQUIRE(int(horiz_.size()) == r_, "HorizontalCurve: horizontal count");
    CW_REQUIRE(int(vert_.size()) == vertical_pair_count(r_),
               "HorizontalCurve: vertical count");
    for (auto& vp : vert_)
      CW_REQUIRE(vp.size() + 1 == knots_.size(), "HorizontalCurve: piece count");
    shifts_.resize(vert_.size());
    cache_.resize(vert_.size());
    for (auto& c : cache_) c.assign(knots_.size() - 1, {});
  }

  int rank() const { return r_; }
  int order() const { return m_; }
  const std::vector<double>& knots() const { return knots_; }
  double t0() const { return knots_.front(); }
  double t1() const { return knots_.back(); }
  const PiecewiseFunction& horizontal(int i) const { return horiz_.at(i - 1); }
  const std::vector<std::vector<VerticalPiece>>& vertical_pieces() const { return vert_; }

  /// Diagnostic hook: adds a function to one vertical component (for probing
  /// how the checks react to a broken curve). Untouched by normal pipelines.
  void shift_vertical(int i, int j, PiecewiseFunction f) {
    shifts_.at(vertical_pair_index(i, j, r_)) = std::move(f);
  }

  double horizontal_derivative(int i, int k, double t) const {
    return horiz_.at(i - 1).eval_derivative(k, t);
  }

  double vertical_value(int i, int j, double t) const {
    int p = vertical_pair_index(i, j, r_);
    int piece = piece_index(t);
    double base;
    const VerticalPiece& vp = vert_[p][piece];
    if (!vp.lifted) {
      base = vp.poly(t);
    } else {
      base = vp.offset + lifted_area(p, piece, t);
    }
    if (shifts_[p]) base += (*shifts_[p])(t);
    return base;
  }

  /// k >= 1: derivative of the vertical component, from the jets of the two
  /// horizontal components on lifted pieces, or the stored polynomial.
  double vertical_derivative(int i, int j, int k, double t) const {
    CW_REQUIRE(k >= 1, "vertical_derivative: use vertical_value for k = 0");
    int p = vertical_pair_index(i, j, r_);
    const VerticalPiece& vp = vert_[p][piece_index(t)];
    double base;
    if (!vp.lifted) {
      base = vp.poly.eval_derivative(k, t);
    } else {
      base = pair_derivative_form(i, j, k, t, 0);
    }
    if (shifts_[p]) base += shifts_[p]->eval_derivative(k, t);
    return base;
  }

  /// One-sided variants for knot diagnostics (side < 0: left, side > 0: right).
  double vertical_value_side(int i, int j, double t, int side) const {
    int p = vertical_pair_index(i, j, r_);
    int piece = piece_index_side(t, side);
    const VerticalPiece& vp = vert_[p][piece];
    double base;
    if (!vp.lifted) {
      base = vp.poly(t);
    } else if (side < 0) {
      base = vp.offset + lifted_area(p, piece, t);
    } else {
      base = (std::abs(t - knots_[piece]) <= 1e-12 * span())
                 ? vp.offset
                 : vp.offset + lifted_area(p, piece, t);
    }
    if (shifts_[p]) base += (*shifts_[p])(t);
    return base;
  }

  double vertical_derivative_side(int i, int j, int k, double t, int side) const {
    CW_REQUIRE(k >= 1, "vertical_derivative_side: k >= 1");
    int p = vertical_pair_index(i, j, r_);
    const VerticalPiece& vp = vert_[p][piece_index_side(t, side)];
    double base;
    if (!vp.lifted) {
      base = vp.poly.eval_derivative(k, t);
    } else {
      base = pair_derivative_form(i, j, k, t, side);
    }
    if (shifts_[p]) base += shifts_[p]->eval_derivative(k, t);
    return base;
  }

  double horizontal_derivative_side(int i, int k, double t, int side) const {
    return side == 0 ? horiz_.at(i - 1).eval_derivative(k, t)
                     : horiz_.at(i - 1).eval_derivative_side(k, t, side);
  }

  GroupElement point(double t) const {
    GroupElement g = GroupElement::identity(r_);
    for (int i = 1; i <= r_; ++i) g.x[i - 1] = horizontal_derivative(i, 0, t);
    for (auto [i, j] : vertical_pairs(r_))
      g.xv[vertical_pair_index(i, j, r_)] = vertical_value(i, j, t);
    return g;
  }

 private:
  double span() const { return knots_.back() - knots_.front(); }

  int piece_index(double t) const {
    int i = int(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin()) - 1;
    return std::clamp(i, 0, int(knots_.size()) - 2);
  }
  int piece_index_side(double t, int side) const {
    if (side >= 0) return piece_index(t);
    int i = int(std::lower_bound(knots_.begin(), knots_.end(), t) - knots_.begin()) - 1;
    return std::clamp(i, 0, int(knots_.size()) - 2);
  }

  double pair_derivative_form(int i, int j, int k, double t, int side) const {
    std::vector<double> xj(k + 1), yj(k + 1);
    for (int l = 0; l <= k; ++l) {
      xj[l] = horizontal_derivative_side(i, l, t, side);
      yj[l] = horizontal_derivative_side(j, l, t, side);
    }
    return horizontal_polynomial(k, xj, yj);
  }

  // Cumulative signed area within one lifted piece. Checkpoints at the bump
  // support edges keep repeated evaluations cheap; the tail past the last
  // checkpoint is integrated on demand.
  struct PieceCache {
    bool built = false;
    std::vector<double> pts;
    std::vector<double> prefix;
  };

  double lifted_area(int p, int piece, double t) const {
    auto [i, j] = vertical_pairs(r_)[p];
    const PiecewiseFunction& fi = horiz_[i - 1];
    const PiecewiseFunction& fj = horiz_[j - 1];
    PieceCache& c = cache_[p][piece];
    const double lo = knots_[piece], hi = knots_[piece + 1];
    if (!c.built) {
      c.pts = pwdetail::merged_segments(fi, &fj, lo, hi);
      c.prefix.assign(c.pts.size(), 0.0);
      for (std::size_t s = 0; s + 1 < c.pts.size(); ++s)
        c.prefix[s + 1] = c.prefix[s] + signed_area(fi, fj, c.pts[s], c.pts[s + 1]);
      c.built = true;
    }
    double tc = std::clamp(t, lo, hi);
    int s = int(std::upper_bound(c.pts.begin(), c.pts.end(), tc) - c.pts.begin()) - 1;
    s = std::clamp(s, 0, int(c.pts.size()) - 2);
    double tail = (tc > c.pts[s]) ? signed_area(fi, fj, c.pts[s], tc) : 0.0;
    return c.prefix[s] + tail;
  }

  int r_ = 0, m_ = 0;
  std::vector<double> knots_;
  std::vector<PiecewiseFunction> horiz_;
  std::vector<std::vector<VerticalPiece>> vert_;
  std::vector<std::optional<PiecewiseFunction>> shifts_;
  mutable std::vector<std::vector<PieceCache>> cache_;
};

/// Lift of given horizontal components to a horizontal curve through `start`:
/// vertical components integrate half the signed area from the left end of
/// the domain. The start element must sit over the initial horizontal values.
inline HorizontalCurve vertical_lift(int r, int m,
                                     const std::vector<PiecewiseFunction>& horizontal,
                                     const GroupElement& start) {
  CW_REQUIRE(int(horizontal.size()) == r, "vertical_lift: component count");
  check_element(start);
  CW_REQUIRE(start.r == r, "vertical_lift: rank mismatch");
  const std::vector<double>& knots = horizontal.front().breakpoints();
  for (const auto& f : horizontal)
    CW_REQUIRE(std::abs(f.domain_lo() - knots.front()) < 1e-12 &&
                   std::abs(f.domain_hi() - knots.back()) < 1e-12,
               "vertical_lift: domain mismatch");
  double scale = 1.0;
  for (int i = 0; i < r; ++i) scale = std::max(scale, std::abs(start.x[i]));
  for (int i = 0; i < r; ++i)
    CW_REQUIRE(std::abs(horizontal[i](knots.front()) - start.x[i]) <= 1e-9 * scale,
               "vertical_lift: start point does not match horizontal values");

  std::vector<double> grid = knots;
  for (const auto& f : horizontal)
    for (double t : f.breakpoints())
      if (t > grid.front() && t < grid.back()) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [&](double a, double b) { return b - a < 1e-14; }),
             grid.end());

  int np = vertical_pair_count(r);
  std::vector<std::vector<HorizontalCurve::VerticalPiece>> vert(np);
  auto pairs = vertical_pairs(r);
  for (int p = 0; p < np; ++p) {
    auto [i, j] = pairs[p];
    double offset = start.xv[p];
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
      HorizontalCurve::VerticalPiece vp;
      vp.lifted = true;
      vp.offset = offset;
      vert[p].push_back(vp);
      offset += signed_area(horizontal[i - 1], horizontal[j - 1], grid[g], grid[g + 1]);
    }
  }
  return HorizontalCurve(r, m, grid, horizontal, std::move(vert));
}

struct HorizontalityPairReport {
  int i = 0, j = 0;
  double max_increment_residual = 0.0;
  std::vector<double> max_derivative_residual;  // index k-1, k = 1..m
};

struct HorizontalityReport {
  std::vector<HorizontalityPairReport> pairs;
  double scale = 1.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Checks the two characterizations of horizontality on a sample grid:
/// the increment identity against an independently integrated signed area,
/// and the derivative identities against the bilinear derivative form.
inline HorizontalityReport horizontality_check(const HorizontalCurve& c, double tol,
                                               int samples_per_piece = 9) {
  HorizontalityReport rep;
  rep.tolerance = tol;
  const auto& knots = c.knots();
  std::vector<double> grid;
  for (std::size_t g = 0; g + 1 < knots.size(); ++g)
    for (int s = 0; s <= samples_per_piece; ++s) {
      double t = knots[g] + (knots[g + 1] - knots[g]) * double(s) / double(samples_per_piece + 1);
      grid.push_back(t);
    }
  grid.push_back(knots.back());

  double scale = 1.0;
  for (double t : grid)
    for (int i = 1; i <= c.rank(); ++i)
      scale = std::max(scale, std::abs(c.horizontal_derivative(i, 0, t)));

  for (auto [i, j] : vertical_pairs(c.rank())) {
    HorizontalityPairReport pr;
    pr.i = i;
    pr.j = j;
    pr.max_derivative_residual.assign(c.order(), 0.0);
    double accum = 0.0;
    double v0 = c.vertical_value(i, j, knots.front());
    scale = std::max(scale, std::abs(v0));
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
      accum += signed_area(c.horizontal(i), c.horizontal(j), grid[s], grid[s + 1]);
      double t = grid[s + 1];
      double v = c.vertical_value(i, j, t);
      scale = std::max(scale, std::abs(v));
      pr.max_increment_residual =
          std::max(pr.max_increment_residual, std::abs(v - v0 - accum));
      for (int k = 1; k <= c.order(); ++k) {
        std::vector<double> xj(k + 1), yj(k + 1);
        for (int l = 0; l <= k; ++l) {
          xj[l] = c.horizontal_derivative(i, l, t);
          yj[l] = c.horizontal_derivative(j, l, t);
        }
        double res = std::abs(c.vertical_derivative(i, j, k, t) -
                              horizontal_polynomial(k, xj, yj));
        pr.max_derivative_residual[k - 1] =
            std::max(pr.max_derivative_residual[k - 1], res);
      }
    }
    rep.pairs.push_back(std::move(pr));
  }
  rep.scale = scale;
  for (const auto& pr : rep.pairs) {
    if (pr.max_increment_residual > tol * rep.scale) rep.pass = false;
    for (double d : pr.max_derivative_residual)
      if (d > tol * rep.scale) rep.pass = false;
  }
  return rep;
}

}  // namespace cw
