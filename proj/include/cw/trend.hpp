#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace cw {

enum class TrendClass { Decaying, Flat, Growing, FlatZero };

struct DyadicBucket {
  int level = 0;       // floor(log2 of the pair separation)
  int count = 0;
  double max_value = 0.0;
};

/// Per-scale maxima of a quantity measured over interval pairs, with a
/// least-squares fit of log2(max) against the dyadic level. slope_per_level
/// is the change in log2(max) per halving of the separation, so negative
/// means the quantity shrinks toward fine scales. The fit uses only the
/// finest tail of the scale range: decay versus blow-up is a statement about
/// b - a -> 0, and coarse pairs would drag the line toward whatever the
/// handful of wide separations happens to measure.
struct DyadicSummary {
  std::vector<DyadicBucket> buckets;  // sorted by level, ascending
  double slope_per_level = 0.0;
  TrendClass classification = TrendClass::Flat;
};

inline DyadicSummary summarize_dyadic(const std::vector<std::pair<double, double>>& width_value,
                                      double classify_margin = 0.05, int tail_levels = 6) {
  DyadicSummary out;
  std::map<int, DyadicBucket> acc;
  for (auto& [w, v] : width_value) {
    if (!(w > 0.0) || !std::isfinite(v)) continue;
    const int level = static_cast<int>(std::floor(std::log2(w)));
    auto& b = acc[level];
    b.level = level;
    b.count += 1;
    b.max_value = std::max(b.max_value, std::abs(v));
  }
  for (auto& [lvl, b] : acc) out.buckets.push_back(b);
  std::vector<const DyadicBucket*> positive;
  for (auto& b : out.buckets)
    if (b.max_value > 0.0) positive.push_back(&b);
  const std::size_t keep =
      std::min(positive.size(), static_cast<std::size_t>(std::max(tail_levels, 2)));
  // Fit log2(max) = alpha + beta * level over the keep finest positive buckets.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t t = 0; t < keep; ++t) {
    const DyadicBucket& b = *positive[t];
    const double x = b.level;
    const double y = std::log2(b.max_value);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    const double denom = n * sxx - sx * sx;
    if (denom != 0.0) {
      const double beta = (n * sxy - sx * sy) / denom;
      // One step toward finer scales decreases the level by one.
      out.slope_per_level = -beta;
    }
  }
  if (n == 0) out.classification = TrendClass::FlatZero;
  else if (out.slope_per_level < -classify_margin) out.classification = TrendClass::Decaying;
  else if (out.slope_per_level > classify_margin) out.classification = TrendClass::Growing;
  else out.classification = TrendClass::Flat;
  return out;
}

inline const char* trend_name(TrendClass t) {
  switch (t) {
    case TrendClass::Decaying: return "decaying";
    case TrendClass::Growing: return "growing";
    case TrendClass::FlatZero: return "flat-zero";
    default: return "flat";
  }
}

}  // namespace cw
