#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cw/numerics.hpp"

namespace cw {

enum class SetKind { Points, Intervals };

/// A finite union of closed parts of the real line: either isolated points or
/// pairwise disjoint closed intervals. Intervals may be degenerate (u == v),
/// which marks a single point sitting inside an interval family; such a part
/// contributes one knot and no interior.
class CompactSet {
 public:
  CompactSet() = default;

  static CompactSet points(std::vector<double> pts) {
    CW_REQUIRE(!pts.empty(), "CompactSet: need at least one point");
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      CW_REQUIRE(pts[i] < pts[i + 1], "CompactSet: points must be distinct");
    CompactSet s;
    s.kind_ = SetKind::Points;
    s.points_ = std::move(pts);
    return s;
  }

  static CompactSet intervals(std::vector<std::pair<double, double>> iv) {
    CW_REQUIRE(!iv.empty(), "CompactSet: need at least one interval");
    std::sort(iv.begin(), iv.end());
    for (auto& [u, v] : iv) CW_REQUIRE(u <= v, "CompactSet: interval endpoints out of order");
    for (std::size_t i = 0; i + 1 < iv.size(); ++i)
      CW_REQUIRE(iv[i].second < iv[i + 1].first, "CompactSet: intervals must be disjoint");
    CompactSet s;
    s.kind_ = SetKind::Intervals;
    s.intervals_ = std::move(iv);
    return s;
  }

  SetKind kind() const { return kind_; }
  bool is_points() const { return kind_ == SetKind::Points; }

  const std::vector<double>& point_list() const { return points_; }
  const std::vector<std::pair<double, double>>& interval_list() const { return intervals_; }

  std::size_t part_count() const {
    return is_points() ? points_.size() : intervals_.size();
  }

  double min() const { return is_points() ? points_.front() : intervals_.front().first; }
  double max() const { return is_points() ? points_.back() : intervals_.back().second; }
  double diameter() const { return max() - min(); }

  /// All part endpoints in increasing order; a degenerate interval and an
  /// isolated point each contribute one knot.
  std::vector<double> knots() const {
    std::vector<double> out;
    if (is_points()) return points_;
    for (auto& [u, v] : intervals_) {
      out.push_back(u);
      if (v > u) out.push_back(v);
    }
    return out;
  }

  /// Open gaps (u, v) between consecutive parts, always with u < v.
  std::vector<std::pair<double, double>> gaps() const {
    std::vector<std::pair<double, double>> out;
    if (is_points()) {
      for (std::size_t i = 0; i + 1 < points_.size(); ++i)
        out.emplace_back(points_[i], points_[i + 1]);
    } else {
      for (std::size_t i = 0; i + 1 < intervals_.size(); ++i)
        out.emplace_back(intervals_[i].second, intervals_[i + 1].first);
    }
    return out;
  }

  /// Index of the part whose closure contains t (within tol), or -1.
  int part_containing(double t, double tol = 0.0) const {
    if (is_points()) {
      for (std::size_t i = 0; i < points_.size(); ++i)
        if (std::abs(t - points_[i]) <= tol) return static_cast<int>(i);
      return -1;
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i)
      if (t >= intervals_[i].first - tol && t <= intervals_[i].second + tol)
        return static_cast<int>(i);
    return -1;
  }

  bool contains(double t, double tol = 0.0) const { return part_containing(t, tol) >= 0; }

 private:
  SetKind kind_ = SetKind::Points;
  std::vector<double> points_;
  std::vector<std::pair<double, double>> intervals_;
};

}  // namespace cw
