#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cw/jets.hpp"
#include "cw/least_squares.hpp"
#include "cw/numerics.hpp"
#include "cw/parallel.hpp"
#include "cw/polynomial.hpp"
#include "cw/trend.hpp"

namespace cw {

/// Exact value of (1/2) int_a^b (p q' - p' q) for polynomials.
inline double poly_signed_area(const Polynomial& p, const Polynomial& q, double a, double b) {
  return 0.5 * (p * q.derivative() - p.derivative() * q).integrate(a, b);
}

/// The defect of the pair (p, q) over [a, b]: how far the vertical increment
/// is from the area swept by the order-m models of the horizontal
/// components, with the endpoint correction that makes the value invariant
/// under left translation of the whole field.
inline double condition_defect(const WhitneyField& f, int p, int q, double a, double b) {
  CW_REQUIRE(a < b, "condition_defect: endpoints out of order");
  const Polynomial Tp = f.taylor_horizontal(p, a);
  const Polynomial Tq = f.taylor_horizontal(q, a);
  const double area = poly_signed_area(Tp, Tq, a, b);
  const double fp_a = f.value_horizontal(p, a);
  const double fq_a = f.value_horizontal(q, a);
  const double fp_b = f.value_horizontal(p, b);
  const double fq_b = f.value_horizontal(q, b);
  return f.value_vertical(p, q, b) - f.value_vertical(p, q, a) - area +
         0.5 * fq_a * (fp_b - Tp(b)) - 0.5 * fp_a * (fq_b - Tq(b));
}

struct AVSample {
  int i = 0, j = 0;
  double a = 0.0, b = 0.0;
  double A = 0.0;
  double V = 0.0;
  double ratio = 0.0;  // signed: A / V
};

inline AVSample compute_av(const WhitneyField& f, int i, int j, double a, double b) {
  AVSample out;
  out.i = i;
  out.j = j;
  out.a = a;
  out.b = b;
  out.A = condition_defect(f, i, j, a, b);
  const double h = b - a;
  const double mass_i = f.taylor_horizontal(i, a).derivative().integrate_abs(a, b);
  const double mass_j = f.taylor_horizontal(j, a).derivative().integrate_abs(a, b);
  out.V = std::pow(h, 2 * f.m) + std::pow(h, f.m) * (mass_i + mass_j);
  out.ratio = out.A / out.V;
  return out;
}

/// All pairwise defects over one interval, indexed like the vertical layer.
struct PairDefects {
  int r = 0;
  std::vector<double> A;
  double at(int p, int q) const { return A[vertical_pair_index(p, q, r)]; }
};

inline PairDefects compute_all_defects(const WhitneyField& f, double a, double b) {
  PairDefects d;
  d.r = f.r;
  d.A.resize(vertical_pair_count(f.r));
  for (auto [p, q] : vertical_pairs(f.r))
    d.A[vertical_pair_index(p, q, f.r)] = condition_defect(f, p, q, a, b);
  return d;
}

/// Coefficient vectors for the corrected defect are indexed by the component
/// labels {1..r} \ {i,j} in increasing order; these helpers translate
/// between that compact form and full length-r vectors.
inline std::vector<int> coefficient_index_set(int r, int i, int j) {
  std::vector<int> ks;
  for (int k = 1; k <= r; ++k)
    if (k != i && k != j) ks.push_back(k);
  return ks;
}

inline std::vector<double> expand_coefficients(int r, int i, int j,
                                               const std::vector<double>& compact) {
  const auto ks = coefficient_index_set(r, i, j);
  CW_REQUIRE(compact.size() == ks.size(),
             "coefficient vector must have one entry per label outside the pair");
  std::vector<double> full(static_cast<std::size_t>(r), 0.0);
  for (std::size_t t = 0; t < ks.size(); ++t)
    full[static_cast<std::size_t>(ks[t] - 1)] = compact[t];
  return full;
}

/// Defect of the pair (i, j) after correcting each horizontal component by a
/// linear combination of the others: ctilde approximates component i, c
/// approximates component j.
struct GeneralizedAVSample {
  int i = 0, j = 0;
  double a = 0.0, b = 0.0;
  std::vector<double> c;       // length r-2, labels {1..r} \ {i,j} ascending
  std::vector<double> ctilde;  // same shape
  double E = 0.0;
  double delta_i = 0.0;  // int |T_i' - sum ctilde_k T_k'|
  double delta_j = 0.0;  // int |T_j' - sum c_k T_k'|
  double denom = 0.0;
  double ratio = 0.0;  // |E| / denom
};

namespace conddetail {

/// E as a function of full-length coefficient vectors, given cached defects.
inline double combine_defects(const PairDefects& d, int i, int j, const std::vector<double>& c,
                              const std::vector<double>& ctilde) {
  const int r = d.r;
  double E = d.at(i, j);
  for (int k = 1; k <= r; ++k) {
    if (k == i || k == j) continue;
    const double ck = c[static_cast<std::size_t>(k - 1)];
    const double tk = ctilde[static_cast<std::size_t>(k - 1)];
    E += (k < j) ? tk * d.at(j, k) : -tk * d.at(k, j);
    E += (k < i) ? -ck * d.at(i, k) : ck * d.at(k, i);
  }
  for (int k = 1; k <= r; ++k) {
    if (k == i || k == j) continue;
    for (int n = 1; n < k; ++n) {
      if (n == i || n == j) continue;
      E += (c[static_cast<std::size_t>(n - 1)] * ctilde[static_cast<std::size_t>(k - 1)] -
            ctilde[static_cast<std::size_t>(n - 1)] * c[static_cast<std::size_t>(k - 1)]) *
           d.at(k, n);
    }
  }
  return E;
}

inline double correction_mass(const WhitneyField& f, int self, int i, int j,
                              const std::vector<double>& full_coeff, double a, double b) {
  Polynomial p = f.taylor_horizontal(self, a).derivative();
  for (int k = 1; k <= f.r; ++k) {
    if (k == i || k == j) continue;
    const double ck = full_coeff[static_cast<std::size_t>(k - 1)];
    if (ck != 0.0) p -= ck * f.taylor_horizontal(k, a).derivative();
  }
  return p.integrate_abs(a, b);
}

}  // namespace conddetail

inline GeneralizedAVSample compute_generalized(const WhitneyField& f, const PairDefects& d, int i,
                                               int j, double a, double b, std::vector<double> c,
                                               std::vector<double> ctilde) {
  CW_REQUIRE(a < b, "compute_generalized: endpoints out of order");
  const auto full_c = expand_coefficients(f.r, i, j, c);
  const auto full_t = expand_coefficients(f.r, i, j, ctilde);
  GeneralizedAVSample out;
  out.i = i;
  out.j = j;
  out.a = a;
  out.b = b;
  out.E = conddetail::combine_defects(d, i, j, full_c, full_t);
  out.delta_i = conddetail::correction_mass(f, i, i, j, full_t, a, b);
  out.delta_j = conddetail::correction_mass(f, j, i, j, full_c, a, b);
  const double h = b - a;
  out.denom = std::pow(h, 2 * f.m) + std::pow(h, f.m) * (out.delta_i + out.delta_j);
  out.ratio = std::abs(out.E) / out.denom;
  out.c = std::move(c);
  out.ctilde = std::move(ctilde);
  return out;
}

inline GeneralizedAVSample compute_generalized(const WhitneyField& f, int i, int j, double a,
                                               double b, std::vector<double> c,
                                               std::vector<double> ctilde) {
  return compute_generalized(f, compute_all_defects(f, a, b), i, j, a, b, std::move(c),
                             std::move(ctilde));
}

/// Pointwise check of the cancellation identity behind the corrected defect:
/// combining the pairings a_pq = f_p f_q' - f_p' f_q with the same
/// coefficients as the defects reproduces the pairing of the residuals
/// eps_i = f_i - sum ctilde_k f_k and eps_j = f_j - sum c_k f_k. Returns the
/// largest absolute mismatch over uniform samples, relative to scale 1 +
/// max |a_pq|.
inline double algebraic_identity_residual(const std::vector<Polynomial>& comps, int i, int j,
                                          const std::vector<double>& c,
                                          const std::vector<double>& ctilde, double a, double b,
                                          int samples = 33) {
  const int r = static_cast<int>(comps.size());
  CW_REQUIRE(r >= 2 && i > j && i <= r && j >= 1, "identity: bad pair");
  const auto full_c = expand_coefficients(r, i, j, c);
  const auto full_t = expand_coefficients(r, i, j, ctilde);

  auto pairing = [&](const Polynomial& p, const Polynomial& q) {
    return p * q.derivative() - p.derivative() * q;
  };

  std::vector<Polynomial> apq(vertical_pair_count(r));
  for (auto [p, q] : vertical_pairs(r))
    apq[vertical_pair_index(p, q, r)] =
        pairing(comps[static_cast<std::size_t>(p - 1)], comps[static_cast<std::size_t>(q - 1)]);

  Polynomial eps_i = comps[static_cast<std::size_t>(i - 1)];
  Polynomial eps_j = comps[static_cast<std::size_t>(j - 1)];
  for (int k = 1; k <= r; ++k) {
    if (k == i || k == j) continue;
    eps_i -= full_t[static_cast<std::size_t>(k - 1)] * comps[static_cast<std::size_t>(k - 1)];
    eps_j -= full_c[static_cast<std::size_t>(k - 1)] * comps[static_cast<std::size_t>(k - 1)];
  }
  const Polynomial target = pairing(eps_i, eps_j);

  PairDefects d;
  d.r = r;
  double worst = 0.0;
  double scale = 1.0;
  for (int s = 0; s <= samples; ++s) {
    const double t = a + (b - a) * s / double(samples);
    d.A.clear();
    for (auto& p : apq) {
      d.A.push_back(p(t));
      scale = std::max(scale, std::abs(d.A.back()));
    }
    const double combined = conddetail::combine_defects(d, i, j, full_c, full_t);
    worst = std::max(worst, std::abs(combined - target(t)));
  }
  return worst / scale;
}

struct GeneralizedAuditOptions {
  double clip = 4.0;  // coefficient box for candidates
  double grid_step = 0.25;
  int max_grid_r = 4;  // full grid only for r - 2 <= 2 free labels per side
};

struct CandidateSample {
  std::string source;  // "zero", "l2_c", "l2_ctilde", "l2", "grid"
  GeneralizedAVSample g;
};

struct GeneralizedAuditRow {
  AVSample av;
  std::vector<CandidateSample> candidates;
  GeneralizedAVSample best;  // candidate with the largest ratio
};

namespace conddetail {

/// Clipped least-squares coefficients approximating T_self' by the other
/// model derivatives, in compact form.
inline std::vector<double> clipped_l2_coefficients(const WhitneyField& f, int self, int i, int j,
                                                   double a, double b, double clip) {
  const auto ks = coefficient_index_set(f.r, i, j);
  std::vector<double> compact(ks.size(), 0.0);
  if (ks.empty()) return compact;
  std::vector<Polynomial> basis;
  for (int k : ks) basis.push_back(f.taylor_horizontal(k, a).derivative());
  const auto res = l2_least_squares(f.taylor_horizontal(self, a).derivative(), basis, a, b);
  for (std::size_t t = 0; t < ks.size(); ++t)
    compact[t] = std::clamp(res.coefficients[t], -clip, clip);
  return compact;
}

}  // namespace conddetail

/// Audits one pair over one interval. The sup over all coefficients in the
/// box is not globally maximized (the ratio is non-concave); the candidate
/// set {0} u {clipped least-squares minimizers} u {grid for small r} yields
/// a certified lower bound, reported in best.
inline GeneralizedAuditRow audit_generalized_pair(const WhitneyField& f, int i, int j, double a,
                                                  double b,
                                                  const GeneralizedAuditOptions& opts = {}) {
  GeneralizedAuditRow row;
  row.av = compute_av(f, i, j, a, b);

  const PairDefects defects = compute_all_defects(f, a, b);
  const auto ks = coefficient_index_set(f.r, i, j);
  const std::vector<double> zero(ks.size(), 0.0);
  const auto cstar = conddetail::clipped_l2_coefficients(f, j, i, j, a, b, opts.clip);
  const auto tstar = conddetail::clipped_l2_coefficients(f, i, i, j, a, b, opts.clip);

  auto add = [&](const std::string& src, const std::vector<double>& c,
                 const std::vector<double>& t) {
    row.candidates.push_back({src, compute_generalized(f, defects, i, j, a, b, c, t)});
  };
  add("zero", zero, zero);
  add("l2_c", cstar, zero);
  add("l2_ctilde", zero, tstar);
  add("l2", cstar, tstar);

  if (!ks.empty() && f.r <= opts.max_grid_r) {
    const int steps = static_cast<int>(std::round(2.0 * opts.clip / opts.grid_step));
    std::vector<double> values;
    for (int s = 0; s <= steps; ++s) values.push_back(-opts.clip + s * opts.grid_step);

    std::vector<std::vector<double>> compacts;  // all coefficient vectors on the grid
    std::vector<double> cur(ks.size(), 0.0);
    std::function<void(std::size_t)> rec = [&](std::size_t t) {
      if (t == ks.size()) {
        compacts.push_back(cur);
        return;
      }
      for (double v : values) {
        cur[t] = v;
        rec(t + 1);
      }
    };
    rec(0);

    // Each side's correction mass depends only on its own coefficients, so
    // the grid cost is (masses) + (cheap E evaluations) per combination.
    std::vector<std::vector<double>> fulls(compacts.size());
    std::vector<double> mass_c(compacts.size()), mass_t(compacts.size());
    for (std::size_t t = 0; t < compacts.size(); ++t) {
      fulls[t] = expand_coefficients(f.r, i, j, compacts[t]);
      mass_c[t] = conddetail::correction_mass(f, j, i, j, fulls[t], a, b);
      mass_t[t] = conddetail::correction_mass(f, i, i, j, fulls[t], a, b);
    }

    const double h = b - a;
    const double hm = std::pow(h, f.m);
    const double h2m = std::pow(h, 2 * f.m);
    double best_ratio = -1.0;
    std::size_t best_c = 0, best_t = 0;
    for (std::size_t uc = 0; uc < fulls.size(); ++uc) {
      for (std::size_t ut = 0; ut < fulls.size(); ++ut) {
        const double E = conddetail::combine_defects(defects, i, j, fulls[uc], fulls[ut]);
        const double ratio = std::abs(E) / (h2m + hm * (mass_t[ut] + mass_c[uc]));
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best_c = uc;
          best_t = ut;
        }
      }
    }
    add("grid", compacts[best_c], compacts[best_t]);
  }

  row.best = row.candidates.front().g;
  for (const auto& cand : row.candidates)
    if (cand.g.ratio > row.best.ratio) row.best = cand.g;
  return row;
}

struct GeneralizedAudit {
  std::vector<GeneralizedAuditRow> rows;
  DyadicSummary component_trend;    // |plain ratio| against pair separation
  DyadicSummary generalized_trend;  // best corrected ratios
};

/// Audits every vertical pair over the given (a, b) intervals.
inline GeneralizedAudit audit_generalized(const WhitneyField& f,
                                          const std::vector<std::pair<double, double>>& spans,
                                          const GeneralizedAuditOptions& opts = {}) {
  GeneralizedAudit out;
  struct Task {
    int i, j;
    double a, b;
  };
  std::vector<Task> tasks;
  for (auto [a, b] : spans)
    for (auto [i, j] : vertical_pairs(f.r)) tasks.push_back({i, j, a, b});
  out.rows.resize(tasks.size());
  parallel_for_index(static_cast<int>(tasks.size()), [&](int t) {
    const Task& k = tasks[static_cast<std::size_t>(t)];
    out.rows[static_cast<std::size_t>(t)] = audit_generalized_pair(f, k.i, k.j, k.a, k.b, opts);
  });
  std::vector<std::pair<double, double>> comp_wv, gen_wv;
  for (const auto& row : out.rows) {
    comp_wv.emplace_back(row.av.b - row.av.a, std::abs(row.av.ratio));
    gen_wv.emplace_back(row.av.b - row.av.a, row.best.ratio);
  }
  out.component_trend = summarize_dyadic(comp_wv);
  out.generalized_trend = summarize_dyadic(gen_wv);
  return out;
}

/// All ordered pairs of distinct knots, the default audit span set.
inline std::vector<std::pair<double, double>> knot_spans(const CompactSet& K) {
  std::vector<std::pair<double, double>> spans;
  const auto ks = K.knots();
  for (std::size_t ai = 0; ai < ks.size(); ++ai)
    for (std::size_t bi = ai + 1; bi < ks.size(); ++bi)
      if (ks[bi] > ks[ai]) spans.emplace_back(ks[ai], ks[bi]);
  return spans;
}

inline GeneralizedAudit audit_field(const WhitneyField& f,
                                    const GeneralizedAuditOptions& opts = {}) {
  return audit_generalized(f, knot_spans(f.K), opts);
}

}  // namespace cw
