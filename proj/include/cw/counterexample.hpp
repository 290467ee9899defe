#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cw/compact_set.hpp"
#include "cw/jets.hpp"
#include "cw/numerics.hpp"
#include "cw/polynomial.hpp"

namespace cw {

/// A three-component field over a truncated interval family accumulating at
/// 1, whose plain pair ratios decay at fine scales while the corrected
/// ratios blow up. Interval n is [1 - 2^-n, 1 - (3/4) 2^-n] and carries the
/// vertical plateau value 10^-n on the pair (2,1); the horizontal components
/// are t, 0, and -t. The accumulation point is represented at truncation
/// depth N by the degenerate interval [1 - 2^-(N+1), 1 - 2^-(N+1)], which
/// contributes a single knot and no interior.
struct CounterexampleInstance {
  WhitneyField field;
  // The gap family (d_n, c_{n+1}) between consecutive intervals, n = 1..N.
  std::vector<std::pair<double, double>> gap_family;
};

inline CounterexampleInstance build_counterexample(int levels, int m = 2) {
  CW_REQUIRE(levels >= 1, "build_counterexample: need at least one level");
  CW_REQUIRE(m >= 1, "build_counterexample: order must be positive");

  auto c_of = [](int n) { return 1.0 - std::pow(2.0, -n); };
  auto d_of = [](int n) { return 1.0 - 0.75 * std::pow(2.0, -n); };

  std::vector<std::pair<double, double>> parts;
  for (int n = 1; n <= levels; ++n) parts.emplace_back(c_of(n), d_of(n));
  parts.emplace_back(c_of(levels + 1), c_of(levels + 1));

  CounterexampleInstance out;
  out.field.r = 3;
  out.field.m = m;
  out.field.K = CompactSet::intervals(parts);

  const std::size_t nparts = parts.size();
  std::vector<Polynomial> f1(nparts, Polynomial({0.0, 1.0}));
  std::vector<Polynomial> f2(nparts, Polynomial{});
  std::vector<Polynomial> f3(nparts, Polynomial({0.0, -1.0}));
  out.field.horizontal = {FieldComponent::polynomials(std::move(f1)),
                          FieldComponent::polynomials(std::move(f2)),
                          FieldComponent::polynomials(std::move(f3))};

  std::vector<Polynomial> f21;
  for (std::size_t p = 0; p < nparts; ++p)
    f21.push_back(Polynomial({std::pow(10.0, -double(p + 1))}));
  std::vector<Polynomial> zero(nparts, Polynomial{});
  out.field.vertical = {FieldComponent::polynomials(std::move(f21)),
                        FieldComponent::polynomials(zero),
                        FieldComponent::polynomials(zero)};

  for (int n = 1; n <= levels; ++n) out.gap_family.emplace_back(d_of(n), c_of(n + 1));
  return out;
}

}  // namespace cw
