#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cw/group.hpp"
#include "cw/numerics.hpp"

namespace cw {

/// Disjoint bump real estate inside a gap [a, b]: the gap is split into L1
/// equal blocks and each block into one slot per vertical pair, so every
/// pair owns L1 equal-width slots spread uniformly across the gap. L1 is
/// minimal with L1 > 2(r+R) and L1 > 8m^2, which gives two properties the
/// synthesis depends on:
///  - any subinterval of width >= (b-a)/(4m^2) spans more than two blocks
///    and hence contains a complete slot of every pair;
///  - halving every slot in place yields two families (left and right
///    halves) with the same block structure, for splitting the real estate
///    between recursion stages.
/// Dropping a component relabels the survivors while keeping their original
/// slots, so a reduced system keeps using disjoint real estate. Halving and
/// dropping both preserve slot disjointness and the containment property.
class GoodSubsets {
 public:
  static int minimal_block_count(int r, int R, int m) {
    return std::max(2 * (r + R), 8 * m * m) + 1;
  }

  GoodSubsets(double a, double b, int r, int R, int m)
      : a_(a), b_(b), r_(r), R_(R), m_(m), root_r_(r), L1_(minimal_block_count(r, R, m)) {
    CW_REQUIRE(b > a, "GoodSubsets: degenerate gap");
    CW_REQUIRE(r >= 2 && R >= 0 && m >= 1, "GoodSubsets: bad parameters");
    labels_.resize(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) labels_[static_cast<std::size_t>(i)] = i + 1;
  }

  double a() const { return a_; }
  double b() const { return b_; }
  int r() const { return r_; }
  int R() const { return R_; }
  int block_count() const { return L1_; }
  int halvings() const { return halvings_; }

  /// Slot width relative to (b - a).
  double slot_fraction() const {
    return root_slot_fraction() / std::pow(2.0, halvings_);
  }

  /// Original component label behind current label x.
  int original_label(int x) const {
    CW_REQUIRE(x >= 1 && x <= r_, "GoodSubsets: label out of range");
    return labels_[static_cast<std::size_t>(x - 1)];
  }

  /// Slot s (0-based, s < L1) owned by the current-label pair (i, j).
  std::pair<double, double> slot(int i, int j, int s) const {
    CW_REQUIRE(i > j && j >= 1 && i <= r_, "GoodSubsets: bad pair");
    CW_REQUIRE(s >= 0 && s < L1_, "GoodSubsets: slot index out of range");
    const int oi = original_label(i);
    const int oj = original_label(j);
    const int opair = vertical_pair_index(std::max(oi, oj), std::min(oi, oj), root_r_);
    const double block = (b_ - a_) / L1_;
    const double w0 = (b_ - a_) * root_slot_fraction();
    double lo = a_ + s * block + opair * w0;
    double w = w0;
    for (char right : take_right_) {
      w *= 0.5;
      if (right) lo += w;
    }
    return {lo, lo + w};
  }

  /// The two halved families: every slot is replaced by its left (first) or
  /// right (second) half. Block structure and labels are unchanged.
  std::pair<GoodSubsets, GoodSubsets> halve() const {
    GoodSubsets left = *this;
    GoodSubsets right = *this;
    left.take_right_.push_back(0);
    right.take_right_.push_back(1);
    left.halvings_ += 1;
    right.halvings_ += 1;
    return {left, right};
  }

  /// Removes current label k; survivors keep their original slots, labels
  /// above k shift down by one, and R grows by one (the removed component
  /// becomes an auxiliary constraint).
  GoodSubsets without_component(int k) const {
    CW_REQUIRE(r_ >= 3, "GoodSubsets: cannot drop below two components");
    CW_REQUIRE(k >= 1 && k <= r_, "GoodSubsets: label out of range");
    GoodSubsets out = *this;
    out.labels_.erase(out.labels_.begin() + (k - 1));
    out.r_ -= 1;
    out.R_ += 1;
    return out;
  }

 private:
  double root_slot_fraction() const {
    return (1.0 / L1_) * (2.0 / (double(root_r_) * double(root_r_ - 1)));
  }

  double a_, b_;
  int r_, R_, m_;
  int root_r_;
  int L1_;
  int halvings_ = 0;
  std::vector<int> labels_;
  std::vector<char> take_right_;
};

inline GoodSubsets build_good_subsets(int r, int R, int m, double a, double b) {
  return GoodSubsets(a, b, r, R, m);
}

}  // namespace cw
