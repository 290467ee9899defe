#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cw/bump.hpp"
#include "cw/curve.hpp"
#include "cw/good_subsets.hpp"
#include "cw/jets.hpp"
#include "cw/least_squares.hpp"
#include "cw/markov.hpp"
#include "cw/numerics.hpp"
#include "cw/parallel.hpp"
#include "cw/piecewise.hpp"
#include "cw/polynomial.hpp"

namespace cw {

struct ExtendConfig {
  double area_tol = 1e-9;        // per-pair area residual target
  double ortho_tol = 1e-9;       // declared-orthogonality budget
  double gap_floor_rel = 1e-8;   // skip gaps narrower than this times diam(K)
  double borderline_band = 1e-12;  // indecision band around the (b-a)^m threshold
  double rank_cutoff = 1e-12;    // relative singular value cutoff
  double projection_floor = 1e-4;  // below this relative projection mass the
                                   // linear case yields to the product one
  bool staged_audit = false;     // re-audit all fixed pairs after every stage
};

/// Signed area defects of a candidate gap interpolant against the field's
/// vertical data: A_ij = F_ij(b) - F_ij(a) - (1/2) int (f_i f_j' - f_i' f_j).
struct ResidualAreas {
  int r = 0;
  double a = 0.0, b = 0.0;
  std::vector<double> areas;  // vertical pair order

  double at(int i, int j) const { return areas.at(vertical_pair_index(i, j, r)); }

  double max_abs() const {
    double v = 0.0;
    for (double x : areas) v = std::max(v, std::abs(x));
    return v;
  }
};

namespace extdetail {

inline void check_endpoint_jets(const WhitneyField& f,
                                const std::vector<double>& left,
                                const std::vector<double>& right,
                                int component, double a, double b) {
  const double tol = 1e-9 * field_scale(f);
  const auto ja = f.jet_horizontal(component, a);
  const auto jb = f.jet_horizontal(component, b);
  for (int k = 0; k <= f.m; ++k) {
    if (std::abs(left[k] - ja[k]) > tol || std::abs(right[k] - jb[k]) > tol) {
      std::ostringstream msg;
      msg << "residual_areas: component " << component
          << " does not match its endpoint jets on [" << a << ", " << b
          << "] at order " << k;
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace extdetail

inline ResidualAreas residual_areas(const WhitneyField& f,
                                    const std::vector<Polynomial>& fs,
                                    double a, double b) {
  CW_REQUIRE(a < b, "residual_areas: empty interval");
  CW_REQUIRE(static_cast<int>(fs.size()) == f.r, "residual_areas: component count");
  for (int i = 1; i <= f.r; ++i) {
    std::vector<double> jl(f.m + 1), jr(f.m + 1);
    for (int k = 0; k <= f.m; ++k) {
      jl[k] = fs[i - 1].eval_derivative(k, a);
      jr[k] = fs[i - 1].eval_derivative(k, b);
    }
    extdetail::check_endpoint_jets(f, jl, jr, i, a, b);
  }
  ResidualAreas out;
  out.r = f.r;
  out.a = a;
  out.b = b;
  for (auto [i, j] : vertical_pairs(f.r)) {
    const Polynomial& fi = fs[i - 1];
    const Polynomial& fj = fs[j - 1];
    const Polynomial integrand = fi * fj.derivative() - fi.derivative() * fj;
    const double swept = 0.5 * integrand.integrate(a, b);
    const double target = f.value_vertical(i, j, b) - f.value_vertical(i, j, a);
    out.areas.push_back(target - swept);
  }
  return out;
}

inline ResidualAreas residual_areas(const WhitneyField& f,
                                    const std::vector<PiecewiseFunction>& fs,
                                    double a, double b) {
  CW_REQUIRE(a < b, "residual_areas: empty interval");
  CW_REQUIRE(static_cast<int>(fs.size()) == f.r, "residual_areas: component count");
  for (int i = 1; i <= f.r; ++i) {
    std::vector<double> jl(f.m + 1), jr(f.m + 1);
    for (int k = 0; k <= f.m; ++k) {
      jl[k] = fs[i - 1].eval_derivative_side(k, a, +1);
      jr[k] = fs[i - 1].eval_derivative_side(k, b, -1);
    }
    extdetail::check_endpoint_jets(f, jl, jr, i, a, b);
  }
  ResidualAreas out;
  out.r = f.r;
  out.a = a;
  out.b = b;
  for (auto [i, j] : vertical_pairs(f.r)) {
    const double swept = signed_area(fs[i - 1], fs[j - 1], a, b);
    const double target = f.value_vertical(i, j, b) - f.value_vertical(i, j, a);
    out.areas.push_back(target - swept);
  }
  return out;
}

/// Greedy processing order for the components over one gap: largest velocity
/// mass int |T_a F_i'| first, then repeatedly the component whose first-order
/// model is least explained by the span of the already chosen ones. Ties go
/// to the smallest original label, so the order is deterministic.
struct ComponentOrder {
  std::vector<int> order;          // position k (0-based) -> original label
  std::vector<double> mass;        // int |T_a F'| per ordered position
  std::vector<double> independence;  // position 0: mass; else L1 distance to span
};

inline ComponentOrder order_components(const WhitneyField& f, double a, double b) {
  CW_REQUIRE(a < b, "order_components: empty interval");
  const int r = f.r;
  std::vector<Polynomial> models(r);
  for (int i = 1; i <= r; ++i)
    models[i - 1] = f.taylor_horizontal(i, a).derivative();

  ComponentOrder out;
  std::vector<bool> used(r, false);
  std::vector<Polynomial> chosen;
  for (int pos = 0; pos < r; ++pos) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 1; i <= r; ++i) {
      if (used[i - 1]) continue;
      double score;
      if (chosen.empty()) {
        score = models[i - 1].integrate_abs(a, b);
      } else {
        score = l2_least_squares(models[i - 1], chosen, a, b).residual_l1 * (b - a);
      }
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    used[best - 1] = true;
    chosen.push_back(models[best - 1]);
    out.order.push_back(best);
    out.mass.push_back(models[best - 1].integrate_abs(a, b));
    out.independence.push_back(best_score);
  }
  return out;
}

/// One pair synthesis inside a gap. Labels are recorded twice: in the
/// original input numbering and in the greedy processing order.
struct StageRecord {
  int seq = 0;
  std::string path;            // subset family lineage, e.g. "P.1-3"
  int pair_i = 0, pair_j = 0;  // original component labels
  int ord_i = 0, ord_j = 0;    // ordered labels, ord_i > ord_j
  std::string case_tag;        // "zero" | "C1" | "C2" | "C2->C5" | "C5"
  double target_area = 0.0;
  double achieved_area = 0.0;
  double dispatch_mass = 0.0;       // independence mass of the slow component
  double dispatch_threshold = 0.0;  // (b-a)^m
  int slot_count = 0;
  std::vector<int> slots_used;
  std::vector<std::string> constraints;
  std::vector<double> gs_coefficient_magnitudes;  // projection weights (C2)
  double lambda = 0.0;  // C1/C2 amplitude factor
  double mu = 0.0, nu = 0.0;  // product amplitudes (C5)
  int nullspace_dim_v1 = -1, nullspace_dim_v2 = -1;  // per family (C5)
  double ortho_residual = 0.0;   // worst |int phi * constraint| after synthesis
  double area_to_budget = 0.0;   // |A| / (h^2m + h^m (mass_i + mass_j))
  double area_to_h2m = 0.0;      // |A| / h^2m
};

struct StageAuditRow {
  int after_seq = 0;
  int pair_i = 0, pair_j = 0;  // original labels
  double live_residual = 0.0;
};

/// Everything produced for one gap: the perturbations (per original
/// component), the jet interpolants they sit on, and the audit trail.
struct GapPerturbation {
  double a = 0.0, b = 0.0;
  int r = 0, m = 0;
  std::vector<int> order;                 // position -> original label
  std::vector<Polynomial> hermite;        // per original component
  std::vector<PiecewiseFunction> phi;     // per original component
  std::vector<StageRecord> stages;
  std::vector<std::vector<double>> sup_bounds;  // [component-1][k], k = 0..m
  std::vector<StageAuditRow> staged_audit;
  double staged_audit_max_drift = 0.0;
  bool skipped = false;
  bool failed = false;
  std::string warning, failure;
};

namespace extdetail {

inline double sample_scale(const Polynomial& g, double u, double v) {
  double s = 0.0;
  for (int i = 0; i <= 4; ++i) s = std::max(s, std::abs(g(u + (v - u) * i / 4.0)));
  return s;
}

/// int over [u,v] of the unit profile (plateau or ramp) against g, via the
/// shared power-moment tables so synthesis and verification integrals agree
/// to roundoff.
inline double profile_moment(BumpKind kind, double u, double v,
                             const Polynomial& g, int) {
  const double w = v - u;
  const Polynomial unit = g.compose_affine(w, u);  // g(u + w s)
  const auto& M = profile_power_moments(kind);
  const auto& c = unit.coeffs();
  CW_REQUIRE(c.size() <= M.size(), "profile_moment: degree beyond the moment table");
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * M[k];
  return w * acc;
}

struct PairSite {
  int oi = 0, oj = 0;           // ordered labels, oi > oj
  std::string path;             // family lineage
  std::vector<std::pair<double, double>> slots;
  bool current_j_lowest = false;  // pair's slow member is the node's label 1
  int product_cap = 0;            // product construction slot budget; 0 = all
};

struct GapWork {
  const WhitneyField* field = nullptr;
  double a = 0.0, b = 0.0;
  int r = 0, m = 0;
  double hm = 0.0;
  const ExtendConfig* cfg = nullptr;
  std::vector<int> order;               // position -> original label
  std::vector<Polynomial> fprime;       // per ordered label: true interpolant f'
  std::vector<double> delta;            // per ordered label: independence mass
  std::vector<double> mass;             // per ordered label: int |T_a F'|
  std::vector<double> areas;            // ordered-pair targets
  std::vector<PiecewiseFunction> phi;   // per ordered label
  std::set<std::pair<int, int>> done;
  std::vector<StageRecord> stages;
  std::vector<StageAuditRow> audit;
  double audit_drift = 0.0;
  int seq = 0;

  double area(int oi, int oj) const {
    return areas[vertical_pair_index(oi, oj, r)];
  }
};

inline std::string fprime_name(const GapWork& w, int ordered_label) {
  std::ostringstream s;
  s << "f'_" << w.order[ordered_label - 1];
  return s.str();
}

/// Re-derive the live residual of an already-synthesized ordered pair from
/// the accumulated perturbations: target - (lin_i - lin_j + cross).
inline double live_residual(const GapWork& w, int oi, int oj) {
  const PiecewiseFunction fi = PiecewiseFunction::single(w.a, w.b, w.fprime[oi - 1]);
  const PiecewiseFunction fj = PiecewiseFunction::single(w.a, w.b, w.fprime[oj - 1]);
  const double lin_i = integrate_product(w.phi[oi - 1], 0, fj, 0, w.a, w.b);
  const double lin_j = integrate_product(w.phi[oj - 1], 0, fi, 0, w.a, w.b);
  const double cross =
      integrate_product(w.phi[oi - 1], 0, w.phi[oj - 1], 1, w.a, w.b);
  return w.area(oi, oj) - (lin_i - lin_j + cross);
}

inline void run_staged_audit(GapWork& w) {
  for (const StageRecord& s : w.stages) {
    StageAuditRow row;
    row.after_seq = w.seq - 1;
    row.pair_i = s.pair_i;
    row.pair_j = s.pair_j;
    row.live_residual = live_residual(w, s.ord_i, s.ord_j);
    w.audit_drift = std::max(w.audit_drift, std::abs(row.live_residual));
    w.audit.push_back(row);
  }
}

/// Constraint derivatives a pair's pieces must not couple to. With the
/// halving recursion every node sees the full component set split between
/// "current" and "held" members, so the list is simply all other f'.
inline void pair_constraints(const GapWork& w, int oi, int oj, bool include_own,
                             std::vector<Polynomial>& out,
                             std::vector<std::string>& names) {
  out.clear();
  names.clear();
  for (int q = 1; q <= w.r; ++q) {
    if (!include_own && (q == oi || q == oj)) continue;
    out.push_back(w.fprime[q - 1]);
    names.push_back(fprime_name(w, q));
  }
}

inline Eigen::MatrixXd moment_matrix(const std::vector<std::pair<double, double>>& slots,
                                     const std::vector<Polynomial>& gs,
                                     BumpKind kind, int order) {
  Eigen::MatrixXd M(static_cast<int>(gs.size()), static_cast<int>(slots.size()));
  for (int row = 0; row < M.rows(); ++row)
    for (int s = 0; s < M.cols(); ++s)
      M(row, s) =
          profile_moment(kind, slots[s].first, slots[s].second, gs[row], order);
  return M;
}

inline int svd_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double cutoff) {
  const auto& sig = svd.singularValues();
  if (sig.size() == 0) return 0;
  const double top = sig(0);
  if (!(top > 0.0)) return 0;
  int rank = 0;
  for (int i = 0; i < sig.size(); ++i)
    if (sig(i) > cutoff * top) ++rank;
  return rank;
}

/// Product synthesis: a plateau family on phi_i against a ramp family on
/// phi_j, weights taken from the nullspace of the stacked moment rows of
/// every component derivative. The slot profiles pair to a fixed constant
/// independent of slot widths, so the delivered area is exact by design.
inline void synthesize_product(GapWork& w, const PairSite& site, double A,
                               StageRecord& rec) {
  std::vector<Polynomial> gs;
  pair_constraints(w, site.oi, site.oj, true, gs, rec.constraints);
  std::vector<std::pair<double, double>> slots = site.slots;
  if (site.product_cap > 0 &&
      site.product_cap < static_cast<int>(slots.size()))
    slots.resize(static_cast<std::size_t>(site.product_cap));
  const int S = static_cast<int>(slots.size());
  rec.slot_count = S;
  const Eigen::MatrixXd Mp = moment_matrix(slots, gs, BumpKind::Plateau, w.m);
  const Eigen::MatrixXd Mr = moment_matrix(slots, gs, BumpKind::Ramp, w.m);
  Eigen::MatrixXd M(Mp.rows() + Mr.rows(), S);
  M << Mp, Mr;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const int rank = svd_rank(svd, w.cfg->rank_cutoff);
  CW_REQUIRE(rank < S, "extend_gap: stacked moment rows exhausted every slot");
  const Eigen::VectorXd x = svd.matrixV().col(rank);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd1(Mp, Eigen::ComputeThinV);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd2(Mr, Eigen::ComputeThinV);
  rec.nullspace_dim_v1 = S - svd_rank(svd1, w.cfg->rank_cutoff);
  rec.nullspace_dim_v2 = S - svd_rank(svd2, w.cfg->rank_cutoff);

  const double pairing = bump_profile_metadata().plateau_ramp_pairing;
  CW_REQUIRE(pairing > 0.0, "extend_gap: profile pairing constant must be positive");
  const double mn = A / pairing;
  const double nu = std::sqrt(std::abs(mn));
  const double mu = (mn < 0.0) ? -nu : nu;
  rec.mu = mu;
  rec.nu = nu;

  for (int s = 0; s < S; ++s) {
    if (x(s) == 0.0) continue;
    BumpTerm p;
    p.kind = BumpKind::Plateau;
    p.u = slots[s].first;
    p.v = slots[s].second;
    p.amplitude = mu * x(s);
    p.order = w.m;
    w.phi[site.oi - 1].add_bump(p);
    BumpTerm q = p;
    q.kind = BumpKind::Ramp;
    q.amplitude = nu * x(s);
    w.phi[site.oj - 1].add_bump(q);
    rec.slots_used.push_back(s);
  }
  rec.achieved_area = mu * nu * pairing * x.squaredNorm();
  const Eigen::VectorXd res = M * x;
  double worst = 0.0;
  for (int i = 0; i < res.size(); ++i)
    worst = std::max(worst, std::max(std::abs(mu), std::abs(nu)) * std::abs(res(i)));
  rec.ortho_residual = worst;
}

/// Linear synthesis: a plateau family on phi_i alone, coupled to f_j' and
/// projected off the moment rows of every other component derivative.
/// Returns false when the projection collapses, in which case the caller
/// falls through to the product construction.
inline bool synthesize_linear(GapWork& w, const PairSite& site, double A,
                              StageRecord& rec) {
  std::vector<Polynomial> gs;
  pair_constraints(w, site.oi, site.oj, false, gs, rec.constraints);
  const int S = static_cast<int>(site.slots.size());
  Eigen::VectorXd alpha(S);
  for (int s = 0; s < S; ++s)
    alpha(s) = profile_moment(BumpKind::Plateau, site.slots[s].first,
                              site.slots[s].second, w.fprime[site.oj - 1], w.m);

  Eigen::VectorXd perp = alpha;
  if (!gs.empty()) {
    const Eigen::MatrixXd C = moment_matrix(site.slots, gs, BumpKind::Plateau, w.m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    const int rank = svd_rank(svd, w.cfg->rank_cutoff);
    for (int i = 0; i < rank; ++i) {
      const Eigen::VectorXd dir = svd.matrixV().col(i);
      const double c = dir.dot(alpha);
      rec.gs_coefficient_magnitudes.push_back(std::abs(c));
      perp -= c * dir;
    }
  }
  // A collapsed projection would force amplitudes that amplify quadrature
  // noise past the area budget; the product construction handles such pairs
  // exactly, so give up early rather than regularize.
  const double pn = perp.norm();
  if (pn <= w.cfg->projection_floor * std::max(alpha.norm(), 1e-300)) return false;
  rec.slot_count = S;

  const double lambda = A / pn;  // v = perp/pn and v.alpha = pn
  rec.lambda = lambda;
  for (int s = 0; s < S; ++s) {
    if (perp(s) == 0.0) continue;
    BumpTerm p;
    p.kind = BumpKind::Plateau;
    p.u = site.slots[s].first;
    p.v = site.slots[s].second;
    p.amplitude = lambda * perp(s) / pn;
    p.order = w.m;
    w.phi[site.oi - 1].add_bump(p);
    rec.slots_used.push_back(s);
  }
  rec.achieved_area = lambda * perp.dot(alpha) / pn;
  if (!gs.empty()) {
    const Eigen::MatrixXd C = moment_matrix(site.slots, gs, BumpKind::Plateau, w.m);
    const Eigen::VectorXd res = C * (lambda / pn * perp);
    double worst = 0.0;
    for (int i = 0; i < res.size(); ++i) worst = std::max(worst, std::abs(res(i)));
    rec.ortho_residual = worst;
  }
  return true;
}

/// Single-bump attempt: one plateau bump for phi_i inside a window where the
/// slow component's model keeps half its sup. Accepted only when the bump's
/// couplings to every other derivative are negligible at the solved
/// amplitude, so the construction stays exact without any projection.
inline bool synthesize_single_bump(GapWork& w, const PairSite& site, double A,
                                   StageRecord& rec) {
  const Polynomial model = w.field->taylor_horizontal(w.order[site.oj - 1], w.a)
                               .derivative();
  const MarkovSubinterval win = markov_subinterval(model, w.a, w.b, w.m);
  if (win.degenerate) return false;

  int chosen = -1;
  for (int s = 0; s < static_cast<int>(site.slots.size()); ++s) {
    if (site.slots[s].first >= win.lo && site.slots[s].second <= win.hi) {
      chosen = s;
      break;
    }
  }
  if (chosen < 0) return false;

  const auto [u, v] = site.slots[chosen];
  const double moment =
      profile_moment(BumpKind::Plateau, u, v, w.fprime[site.oj - 1], w.m);
  const double scale = (v - u) * (1.0 + sample_scale(w.fprime[site.oj - 1], u, v));
  if (std::abs(moment) <= 1e-12 * scale) return false;

  const double amp = A / moment;
  std::vector<Polynomial> gs;
  std::vector<std::string> names;
  pair_constraints(w, site.oi, site.oj, false, gs, names);
  double worst = 0.0;
  for (const Polynomial& g : gs)
    worst = std::max(worst,
                     std::abs(amp * profile_moment(BumpKind::Plateau, u, v, g, w.m)));
  if (worst > 1e-12 * std::max(1.0, std::abs(A))) return false;

  rec.constraints = names;
  rec.lambda = amp;
  rec.ortho_residual = worst;
  BumpTerm p;
  p.kind = BumpKind::Plateau;
  p.u = u;
  p.v = v;
  p.amplitude = amp;
  p.order = w.m;
  w.phi[site.oi - 1].add_bump(p);
  rec.slots_used.push_back(chosen);
  rec.achieved_area = amp * moment;
  return true;
}

inline void synthesize_pair(GapWork& w, const PairSite& site) {
  const int orig_i = w.order[site.oi - 1];
  const int orig_j = w.order[site.oj - 1];
  StageRecord rec;
  rec.seq = w.seq;
  rec.path = site.path;
  rec.pair_i = orig_i;
  rec.pair_j = orig_j;
  rec.ord_i = site.oi;
  rec.ord_j = site.oj;
  rec.slot_count = static_cast<int>(site.slots.size());
  const double A = w.area(site.oi, site.oj);
  rec.target_area = A;
  rec.dispatch_mass = w.delta[site.oj - 1];
  rec.dispatch_threshold = w.hm;
  const double budget =
      w.hm * w.hm + w.hm * (w.mass[site.oi - 1] + w.mass[site.oj - 1]);
  rec.area_to_budget = std::abs(A) / budget;
  rec.area_to_h2m = std::abs(A) / (w.hm * w.hm);

  if (A == 0.0) {
    rec.case_tag = "zero";
  } else if (rec.dispatch_mass > w.hm - w.cfg->borderline_band) {
    bool done = false;
    if (site.current_j_lowest) {
      done = synthesize_single_bump(w, site, A, rec);
      if (done) rec.case_tag = "C1";
    }
    if (!done) {
      rec.slots_used.clear();
      rec.constraints.clear();
      done = synthesize_linear(w, site, A, rec);
      rec.case_tag = done ? "C2" : "C2->C5";
    }
    if (!done) {
      rec.slots_used.clear();
      rec.constraints.clear();
      synthesize_product(w, site, A, rec);
    }
  } else {
    rec.case_tag = "C5";
    synthesize_product(w, site, A, rec);
  }

  w.stages.push_back(rec);
  ++w.seq;
  if (w.cfg->staged_audit) run_staged_audit(w);
}

inline std::vector<std::pair<double, double>> site_slots(const GoodSubsets& gs,
                                                         int i, int j, int count) {
  std::vector<std::pair<double, double>> out;
  for (int s = 0; s < count; ++s) out.push_back(gs.slot(i, j, s));
  return out;
}

inline void do_pair(GapWork& w, const GoodSubsets& node, int i_cur, int j_cur,
                    const std::string& path, bool root_three_endgame) {
  const int oi = node.original_label(i_cur);
  const int oj = node.original_label(j_cur);
  if (!w.done.insert({oi, oj}).second) return;
  PairSite site;
  site.oi = oi;
  site.oj = oj;
  site.path = path;
  site.current_j_lowest = (j_cur == 1);
  site.product_cap = root_three_endgame ? 7 : 0;
  site.slots = site_slots(node, i_cur, j_cur, node.block_count());
  synthesize_pair(w, site);
}

/// The halving recursion: split the slot family, retire the fastest
/// component on the left half and the runner-up on the right, recurse, then
/// close the remaining top pair on the right half's own slots.
inline void recurse(GapWork& w, const GoodSubsets& node, const std::string& path,
                    bool at_root) {
  const int n = node.r();
  if (n == 2) {
    do_pair(w, node, 2, 1, path, false);
    return;
  }
  auto halves = node.halve();
  {
    std::ostringstream p;
    p << path << ".1-" << node.original_label(n);
    recurse(w, halves.first.without_component(n), p.str(), false);
  }
  {
    std::ostringstream p;
    p << path << ".2-" << node.original_label(n - 1);
    recurse(w, halves.second.without_component(n - 1), p.str(), false);
  }
  do_pair(w, halves.second, n, n - 1, path + ".2", at_root && n == 3);
}

}  // namespace extdetail

/// Builds the gap perturbations: one piecewise function per component,
/// supported on disjoint bump slots, whose added signed areas hit the
/// residual area of the jet interpolants against the field's vertical data
/// pair by pair. Pieces for one pair couple to no other component's
/// derivative, so pairs can be processed in any order without revisiting.
inline GapPerturbation extend_gap(const WhitneyField& f,
                                  const std::vector<Polynomial>& hermite,
                                  double a, double b,
                                  const ExtendConfig& cfg = ExtendConfig()) {
  CW_REQUIRE(a < b, "extend_gap: empty gap");
  CW_REQUIRE(static_cast<int>(hermite.size()) == f.r, "extend_gap: component count");
  GapPerturbation out;
  out.a = a;
  out.b = b;
  out.r = f.r;
  out.m = f.m;
  out.hermite = hermite;
  for (int i = 0; i < f.r; ++i) out.phi.push_back(PiecewiseFunction::zero(a, b));

  const double diam = f.K.diameter();
  if ((b - a) < cfg.gap_floor_rel * (diam > 0.0 ? diam : 1.0)) {
    out.skipped = true;
    std::ostringstream msg;
    msg << "gap [" << a << ", " << b << "] narrower than the configured floor; "
        << "keeping the raw jet interpolants without area correction";
    out.warning = msg.str();
    for (int i = 0; i < f.r; ++i)
      out.sup_bounds.push_back(std::vector<double>(f.m + 1, 0.0));
    return out;
  }

  try {
    const ResidualAreas targets = residual_areas(f, hermite, a, b);
    const ComponentOrder co = order_components(f, a, b);
    out.order = co.order;

    extdetail::GapWork w;
    w.field = &f;
    w.a = a;
    w.b = b;
    w.r = f.r;
    w.m = f.m;
    w.hm = std::pow(b - a, f.m);
    w.cfg = &cfg;
    w.order = co.order;
    w.mass = co.mass;
    w.delta = co.independence;
    for (int k = 1; k <= f.r; ++k)
      w.fprime.push_back(hermite[co.order[k - 1] - 1].derivative());
    w.areas.resize(vertical_pair_count(f.r));
    for (auto [p, q] : vertical_pairs(f.r)) {
      const int op = co.order[p - 1];
      const int oq = co.order[q - 1];
      const double v = (op > oq) ? targets.at(op, oq) : -targets.at(oq, op);
      w.areas[vertical_pair_index(p, q, f.r)] = v;
    }
    for (int k = 0; k < f.r; ++k) w.phi.push_back(PiecewiseFunction::zero(a, b));

    const GoodSubsets root = build_good_subsets(f.r, 0, f.m, a, b);
    extdetail::recurse(w, root, "P", true);

    for (int k = 1; k <= f.r; ++k) out.phi[co.order[k - 1] - 1] = w.phi[k - 1];
    out.stages = w.stages;
    out.staged_audit = w.audit;
    out.staged_audit_max_drift = w.audit_drift;

    const auto& meta = bump_profile_metadata();
    for (int i = 0; i < f.r; ++i) {
      std::vector<double> sup(f.m + 1, 0.0);
      for (const BumpTerm& t : out.phi[i].bumps()) {
        const auto& table = (t.kind == BumpKind::Plateau) ? meta.plateau_deriv_sup
                                                          : meta.ramp_deriv_sup;
        for (int k = 0; k <= f.m; ++k)
          sup[k] += std::abs(t.amplitude) * table[k] / std::pow(t.v - t.u, k);
      }
      out.sup_bounds.push_back(sup);
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.failure = e.what();
    out.stages.clear();
    for (int i = 0; i < f.r; ++i) out.phi[i] = PiecewiseFunction::zero(a, b);
    out.sup_bounds.assign(f.r, std::vector<double>(f.m + 1, 0.0));
  }
  return out;
}

/// The corrected gap functions: jet interpolant plus perturbation, one
/// piecewise function per component over [a, b].
inline std::vector<PiecewiseFunction> gap_functions(const GapPerturbation& g) {
  std::vector<PiecewiseFunction> out;
  for (int i = 0; i < g.r; ++i) {
    PiecewiseFunction h = PiecewiseFunction::single(g.a, g.b, g.hermite[i]);
    for (const BumpTerm& t : g.phi[i].bumps()) h.add_bump(t);
    out.push_back(std::move(h));
  }
  return out;
}

/// Horizontal components of the full extension: the field's own polynomials
/// across the parts of K, the corrected interpolants across the gaps.
inline std::vector<PiecewiseFunction> assemble_horizontal(
    const WhitneyField& f, const std::vector<GapPerturbation>& gaps) {
  const std::vector<double> knots = f.K.knots();
  CW_REQUIRE(knots.size() >= 2, "assemble_horizontal: need at least two knots");
  const double tol = f.location_tolerance();

  std::vector<PiecewiseFunction> out;
  for (int i = 1; i <= f.r; ++i) {
    std::vector<Polynomial> pieces;
    for (std::size_t g = 0; g + 1 < knots.size(); ++g) {
      const double u = knots[g], v = knots[g + 1];
      const GapPerturbation* gp = nullptr;
      for (const auto& cand : gaps)
        if (std::abs(cand.a - u) <= tol && std::abs(cand.b - v) <= tol) gp = &cand;
      if (gp != nullptr) {
        CW_REQUIRE(!gp->failed, "assemble_horizontal: gap synthesis failed: " +
                                    gp->failure);
        pieces.push_back(gp->hermite[i - 1]);
      } else {
        CW_REQUIRE(f.K.part_containing(0.5 * (u + v), tol) >= 0,
                   "assemble_horizontal: interval covered by neither a part nor "
                   "a supplied gap");
        pieces.push_back(f.taylor_horizontal(i, u));
      }
    }
    PiecewiseFunction h(knots, pieces);
    for (const auto& gp : gaps)
      for (const BumpTerm& t : gp.phi[i - 1].bumps()) h.add_bump(t);
    out.push_back(std::move(h));
  }
  return out;
}

/// Assembles the extension as a horizontal curve: vertical components are
/// lifted piece by piece, each anchored at the field's own vertical value at
/// the piece's left knot. The area corrections make consecutive pieces agree
/// at the knots, which the verification checks rather than assumes.
inline HorizontalCurve assemble_curve(const WhitneyField& f,
                                      const std::vector<GapPerturbation>& gaps) {
  const std::vector<double> knots = f.K.knots();
  std::vector<PiecewiseFunction> horiz = assemble_horizontal(f, gaps);
  std::vector<std::vector<HorizontalCurve::VerticalPiece>> vert;
  for (auto [i, j] : vertical_pairs(f.r)) {
    std::vector<HorizontalCurve::VerticalPiece> pieces;
    for (std::size_t g = 0; g + 1 < knots.size(); ++g) {
      HorizontalCurve::VerticalPiece vp;
      vp.lifted = true;
      vp.offset = f.value_vertical(i, j, knots[g]);
      pieces.push_back(vp);
    }
    vert.push_back(std::move(pieces));
  }
  return HorizontalCurve(f.r, f.m, knots, std::move(horiz), std::move(vert));
}

struct ExtensionResult {
  std::vector<GapPerturbation> gaps;
  HorizontalCurve curve;
  bool ok = false;
  std::string failure_summary;
};

/// Full pipeline for one field: jet interpolants on every gap, area
/// corrections, curve assembly. Gap failures do not abort the rest; they are
/// collected and the curve is only built when every gap succeeded.
inline ExtensionResult extend_field(const WhitneyField& f,
                                    const ExtendConfig& cfg = ExtendConfig()) {
  CW_REQUIRE(f.K.knots().size() >= 2, "extend_field: need at least two knots");
  ExtensionResult out;
  const auto gaps = f.K.gaps();
  out.gaps.resize(gaps.size());
  parallel_for_index(static_cast<int>(gaps.size()), [&](int g) {
    const auto [a, b] = gaps[static_cast<std::size_t>(g)];
    std::vector<Polynomial> hermite;
    for (int i = 1; i <= f.r; ++i)
      hermite.push_back(
          hermite_extend_gap(f.jet_horizontal(i, a), f.jet_horizontal(i, b), a, b));
    out.gaps[static_cast<std::size_t>(g)] = extend_gap(f, hermite, a, b, cfg);
  });
  std::ostringstream bad;
  bool any_failed = false;
  for (const auto& g : out.gaps) {
    if (!g.failed) continue;
    if (any_failed) bad << "; ";
    bad << "gap [" << g.a << ", " << g.b << "]: " << g.failure;
    any_failed = true;
  }
  out.ok = !any_failed;
  out.failure_summary = bad.str();
  if (out.ok) out.curve = assemble_curve(f, out.gaps);
  return out;
}

struct VerifyTolerances {
  double jet = 1e-9;            // relative to the field scale
  double horizontality = 1e-8;  // relative to the curve's own scale
  double knot = 1e-9;           // relative to the field scale
};

struct JetMatchRow {
  std::string component;
  int k = 0;
  double x = 0.0;
  double residual = 0.0;  // absolute
};

struct KnotSmoothRow {
  std::string component;
  int k = 0;
  double x = 0.0;
  double mismatch = 0.0;  // absolute one-sided jump
};

struct VerifyReport {
  double scale = 1.0;
  double max_jet_residual = 0.0;       // relative
  std::vector<JetMatchRow> worst_jets;  // worst row per component
  HorizontalityReport horizontality;
  double max_knot_mismatch = 0.0;      // relative
  std::vector<KnotSmoothRow> worst_knots;
  bool jets_pass = false;
  bool horizontality_pass = false;
  bool knots_pass = false;
  bool pass = false;
};

namespace extdetail {

inline double curve_side_derivative(const HorizontalCurve& c, int i, int j,
                                    int k, double x, int side) {
  if (j == 0) return c.horizontal_derivative_side(i, k, x, side);
  if (k == 0) return c.vertical_value_side(i, j, x, side);
  return c.vertical_derivative_side(i, j, k, x, side);
}

inline std::string component_name(int i, int j) {
  std::ostringstream s;
  if (j == 0)
    s << "x" << i;
  else
    s << "x" << i << j;
  return s.str();
}

}  // namespace extdetail

/// Checks a curve against the field it claims to extend: jets of every
/// component at every knot of K, the horizontality identities along the whole
/// curve, and one-sided smoothness of the curve at its interior knots.
inline VerifyReport verify_extension(const HorizontalCurve& c,
                                     const WhitneyField& f,
                                     const VerifyTolerances& tol = VerifyTolerances()) {
  CW_REQUIRE(c.rank() == f.r, "verify_extension: rank mismatch");
  CW_REQUIRE(c.order() == f.m, "verify_extension: order mismatch");
  VerifyReport rep;
  rep.scale = field_scale(f);

  std::vector<std::pair<int, int>> comps;
  for (int i = 1; i <= f.r; ++i) comps.push_back({i, 0});
  for (auto [i, j] : vertical_pairs(f.r)) comps.push_back({i, j});

  const std::vector<double> kknots = f.K.knots();
  for (auto [i, j] : comps) {
    JetMatchRow worst;
    worst.component = extdetail::component_name(i, j);
    for (double x : kknots) {
      const std::vector<double> jet =
          (j == 0) ? f.jet_horizontal(i, x) : f.jet_vertical(i, j, x);
      for (int k = 0; k <= f.m; ++k) {
        for (int side : {-1, +1}) {
          if (side < 0 && x <= c.t0()) continue;
          if (side > 0 && x >= c.t1()) continue;
          const double got = extdetail::curve_side_derivative(c, i, j, k, x, side);
          const double res = std::abs(got - jet[static_cast<std::size_t>(k)]);
          if (res > worst.residual) {
            worst.residual = res;
            worst.k = k;
            worst.x = x;
          }
        }
      }
    }
    rep.max_jet_residual = std::max(rep.max_jet_residual, worst.residual / rep.scale);
    rep.worst_jets.push_back(worst);
  }

  rep.horizontality = horizontality_check(c, tol.horizontality);

  const std::vector<double>& cknots = c.knots();
  for (auto [i, j] : comps) {
    KnotSmoothRow worst;
    worst.component = extdetail::component_name(i, j);
    for (std::size_t g = 1; g + 1 < cknots.size(); ++g) {
      const double x = cknots[g];
      for (int k = 0; k <= f.m; ++k) {
        const double left = extdetail::curve_side_derivative(c, i, j, k, x, -1);
        const double right = extdetail::curve_side_derivative(c, i, j, k, x, +1);
        const double jump = std::abs(left - right);
        if (jump > worst.mismatch) {
          worst.mismatch = jump;
          worst.k = k;
          worst.x = x;
        }
      }
    }
    rep.max_knot_mismatch =
        std::max(rep.max_knot_mismatch, worst.mismatch / rep.scale);
    rep.worst_knots.push_back(worst);
  }

  rep.jets_pass = rep.max_jet_residual <= tol.jet;
  rep.horizontality_pass = rep.horizontality.pass;
  rep.knots_pass = rep.max_knot_mismatch <= tol.knot;
  rep.pass = rep.jets_pass && rep.horizontality_pass && rep.knots_pass;
  return rep;
}

}  // namespace cw
