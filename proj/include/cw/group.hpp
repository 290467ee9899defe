#pragma once

#include <utility>
#include <vector>

#include "cw/numerics.hpp"

namespace cw {

// Free step-2 nilpotent group on r horizontal generators, realized on
// R^{r + r(r-1)/2}. Horizontal coordinates are indexed 1..r; vertical
// coordinates are indexed by pairs (i,j) with 1 <= j < i <= r, stored in
// lexicographic order (2,1),(3,1),(3,2),(4,1),... This index map is shared
// by every module that touches vertical data.

inline int vertical_pair_count(int r) { return r * (r - 1) / 2; }

inline int vertical_pair_index(int i, int j, int r) {
  CW_REQUIRE(r >= 2 && j >= 1 && j < i && i <= r, "vertical_pair_index: bad pair");
  return (i - 1) * (i - 2) / 2 + (j - 1);
}

inline std::vector<std::pair<int, int>> vertical_pairs(int r) {
  std::vector<std::pair<int, int>> ps;
  for (int i = 2; i <= r; ++i)
    for (int j = 1; j < i; ++j) ps.emplace_back(i, j);
  return ps;
}

struct GroupElement {
  int r = 0;
  std::vector<double> x;   // horizontal, size r
  std::vector<double> xv;  // vertical, size r(r-1)/2, pair order as above

  static GroupElement identity(int r) {
    GroupElement g;
    g.r = r;
    g.x.assign(r, 0.0);
    g.xv.assign(vertical_pair_count(r), 0.0);
    return g;
  }
};

inline void check_element(const GroupElement& g) {
  CW_REQUIRE(g.r >= 2, "GroupElement: need r >= 2");
  CW_REQUIRE(int(g.x.size()) == g.r, "GroupElement: horizontal size mismatch");
  CW_REQUIRE(int(g.xv.size()) == vertical_pair_count(g.r),
             "GroupElement: vertical size mismatch");
}

/// Group law: horizontal parts add; vertical parts pick up half the signed
/// area term, (a b)_{ij} = a_{ij} + b_{ij} + (a_i b_j - b_i a_j)/2.
inline GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  check_element(a);
  check_element(b);
  CW_REQUIRE(a.r == b.r, "multiply: rank mismatch");
  GroupElement c = GroupElement::identity(a.r);
  for (int i = 0; i < a.r; ++i) c.x[i] = a.x[i] + b.x[i];
  for (auto [i, j] : vertical_pairs(a.r)) {
    int p = vertical_pair_index(i, j, a.r);
    c.xv[p] = a.xv[p] + b.xv[p] +
              0.5 * (a.x[i - 1] * b.x[j - 1] - b.x[i - 1] * a.x[j - 1]);
  }
  return c;
}

/// In a step-2 group the inverse is plain negation of all coordinates.
inline GroupElement inverse(const GroupElement& a) {
  check_element(a);
  GroupElement c = a;
  for (double& v : c.x) v = -v;
  for (double& v : c.xv) v = -v;
  return c;
}

/// Bilinear derivative form: for jets (x_0..x_k) and (y_0..y_k) of two
/// horizontal components, the k-th derivative of their vertical coordinate is
///   (1/2) sum_{l=0}^{k-1} C(k-1,l) (x_l y_{k-l} - y_l x_{k-l}).
inline double horizontal_polynomial(int k, const std::vector<double>& xjet,
                                    const std::vector<double>& yjet) {
  CW_REQUIRE(k >= 1, "horizontal_polynomial: order must be >= 1");
  CW_REQUIRE(int(xjet.size()) > k && int(yjet.size()) > k,
             "horizontal_polynomial: jets too short");
  double s = 0.0;
  for (int l = 0; l <= k - 1; ++l)
    s += binomial(k - 1, l) * (xjet[l] * yjet[k - l] - yjet[l] * xjet[k - l]);
  return 0.5 * s;
}

/// Same form with the 2(k+1) arguments interleaved as (x0,y0,x1,y1,...,xk,yk).
inline double horizontal_polynomial(int k, const std::vector<double>& interleaved) {
  CW_REQUIRE(int(interleaved.size()) == 2 * (k + 1),
             "horizontal_polynomial: expected 2(k+1) interleaved values");
  std::vector<double> xj(k + 1), yj(k + 1);
  for (int l = 0; l <= k; ++l) {
    xj[l] = interleaved[2 * l];
    yj[l] = interleaved[2 * l + 1];
  }
  return horizontal_polynomial(k, xj, yj);
}

}  // namespace cw
