#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "cw/numerics.hpp"
#include "cw/polynomial.hpp"

namespace cw {

// Smooth compactly supported profiles on the unit interval, with derivatives
// of every order available in closed form via a rational recurrence.
//
// Base profile: b(s) = exp(-1/(s(1-s))) on (0,1), zero outside. Writing
// w = s(1-s), the k-th derivative is P_k(s)/w^{2k} * b(s) with P_0 = 1 and
// P_{k+1} = P_k' w^2 - 2k P_k w' w + P_k w'. Once w is small enough that
// exp(-1/w) underflows to an exact 0 in double precision, the whole
// expression is returned as 0 before the rational part can overflow.
namespace bumpdetail {

inline constexpr int kMaxDerivOrder = 12;
inline constexpr double kUnderflowW = 1.25e-3;  // exp(-1/w) == 0.0 below this

inline const std::vector<Polynomial>& rational_numerators() {
  static const std::vector<Polynomial> table = [] {
    std::vector<Polynomial> t;
    Polynomial w({0.0, 1.0, -1.0});   // s - s^2
    Polynomial wp({1.0, -2.0});       // 1 - 2s
    t.push_back(Polynomial::constant(1.0));
    for (int k = 0; k + 1 <= kMaxDerivOrder; ++k) {
      const Polynomial& Pk = t.back();
      Polynomial next = Pk.derivative() * (w * w) - (2.0 * k) * (Pk * (wp * w)) + Pk * wp;
      t.push_back(next);
    }
    return t;
  }();
  return table;
}

/// j-th derivative of the base profile b at sigma (unnormalized).
inline double base_deriv(int j, double sigma) {
  CW_REQUIRE(j >= 0 && j <= kMaxDerivOrder, "bump: derivative order out of range");
  if (sigma <= 0.0 || sigma >= 1.0) return 0.0;
  const double w = sigma * (1.0 - sigma);
  if (w <= kUnderflowW) return 0.0;
  const double e = std::exp(-1.0 / w);
  if (j == 0) return e;
  const double num = rational_numerators()[j](sigma);
  return e * num / std::pow(w, 2 * j);
}

/// Cumulative integral B(sigma) = int_0^sigma b, tabulated once on a fine
/// panel grid; the partial panel is finished with a single GL16 pass.
inline double base_cumulative(double sigma) {
  static constexpr int kPanels = 2048;
  static const std::vector<double> prefix = [] {
    std::vector<double> p(kPanels + 1, 0.0);
    for (int i = 0; i < kPanels; ++i) {
      double u = double(i) / kPanels, v = double(i + 1) / kPanels;
      p[i + 1] = p[i] + gauss16([](double s) { return base_deriv(0, s); }, u, v);
    }
    return p;
  }();
  if (sigma <= 0.0) return 0.0;
  if (sigma >= 1.0) return prefix[kPanels];
  int i = std::min(int(sigma * kPanels), kPanels - 1);
  double u = double(i) / kPanels;
  double tail = (sigma > u)
                    ? gauss16([](double s) { return base_deriv(0, s); }, u, sigma)
                    : 0.0;
  return prefix[i] + tail;
}

inline double base_mass() { return base_cumulative(1.0); }

}  // namespace bumpdetail

enum class BumpKind {
  Plateau,  // serialized "eta": positive bump, peak value = amplitude
  Ramp      // serialized "xi": zero-mean-free ramp, sup value = amplitude,
            // derivative bounded below on a fixed central subinterval
};

/// Profile constants, all for the unit-amplitude profiles on [0,1].
struct BumpProfileMetadata {
  double plateau_middle_third_min;   // min of plateau on [1/3,2/3]
  double ramp_central_slope;         // min of ramp' on [4/9,5/9]
  double ramp_central_lo, ramp_central_hi;  // the central subinterval
  double c_bump;                     // sup(1/plateau floor, normalizers), >= 1
  double plateau_ramp_pairing;       // int_0^1 plateau * ramp' ds (slot-size free)
  std::vector<double> plateau_deriv_sup;  // sup |D^k| of unit plateau, k=0..12
  std::vector<double> ramp_deriv_sup;     // sup |D^k| of unit ramp, k=0..12
};

namespace bumpdetail {

/// Unit plateau profile: peak value 1 at s=1/2.
inline double plateau_deriv(int k, double s) {
  static const double peak = std::exp(-4.0);
  return base_deriv(k, s) / peak;
}

inline double ramp_sup_raw() { return base_mass() / 3.0; }

/// Raw ramp r(s) = (1/3)(B(3s-1) - B(6s-4)): zero with all derivatives at both
/// endpoints, increasing on the middle third, back to zero from s = 5/6 on.
inline double ramp_raw_deriv(int k, double s) {
  if (k == 0) return (base_cumulative(3.0 * s - 1.0) - base_cumulative(6.0 * s - 4.0)) / 3.0;
  double a = std::pow(3.0, k - 1) * base_deriv(k - 1, 3.0 * s - 1.0);
  double b = std::pow(6.0, k) / 3.0 * base_deriv(k - 1, 6.0 * s - 4.0);
  return a - b;
}

/// Unit ramp profile: sup value 1.
inline double ramp_deriv(int k, double s) {
  static const double sup = ramp_sup_raw();
  return ramp_raw_deriv(k, s) / sup;
}

}  // namespace bumpdetail

namespace bumpdetail {

inline constexpr int kMomentPowers = 48;

inline double unit_deriv(int which, int k, double s) {
  return (which == 0) ? plateau_deriv(k, s) : ramp_deriv(k, s);
}

/// Power moments int_0^1 s^j profile(s) ds of the two unit profiles,
/// j = 0..47, tabulated once at high accuracy.
inline const std::array<std::vector<double>, 2>& value_power_moments() {
  static const auto tables = [] {
    std::array<std::vector<double>, 2> t;
    for (int which = 0; which < 2; ++which) {
      t[which].reserve(kMomentPowers);
      for (int j = 0; j < kMomentPowers; ++j) {
        auto f = [&](double s) { return unit_deriv(which, 0, s) * std::pow(s, j); };
        t[which].push_back(integrate_adaptive(f, 0.0, 1.0, 1e-16, 1e-15).value);
      }
    }
    return t;
  }();
  return tables;
}

/// Constants int_0^1 A^{(da)}(s) B^{(db)}(s) ds for A, B unit profiles and
/// derivative orders <= 1, indexed by (which*2 + deriv). The entries that by
/// parts must vanish or mirror another entry are written down that way rather
/// than re-integrated, so the table can never disagree with itself.
inline const std::array<std::array<double, 4>, 4>& cross_profile_constants() {
  static const auto table = [] {
    auto pair_int = [](int wa, int da, int wb, int db) {
      return integrate_adaptive(
                 [&](double s) {
                   return unit_deriv(wa, da, s) * unit_deriv(wb, db, s);
                 },
                 0.0, 1.0, 1e-16, 1e-15)
          .value;
    };
    const double pp = pair_int(0, 0, 0, 0);
    const double pr = pair_int(0, 0, 1, 0);
    const double rr = pair_int(1, 0, 1, 0);
    const double prd = pair_int(0, 0, 1, 1);  // int plateau * ramp'
    const double dpdp = pair_int(0, 1, 0, 1);
    const double dpdr = pair_int(0, 1, 1, 1);
    const double drdr = pair_int(1, 1, 1, 1);
    std::array<std::array<double, 4>, 4> c{};
    auto at = [&](int wa, int da, int wb, int db) -> double& {
      return c[std::size_t(wa * 2 + da)][std::size_t(wb * 2 + db)];
    };
    at(0, 0, 0, 0) = pp;
    at(0, 0, 1, 0) = at(1, 0, 0, 0) = pr;
    at(1, 0, 1, 0) = rr;
    at(0, 0, 0, 1) = at(0, 1, 0, 0) = 0.0;  // int P P' = [P^2]/2 = 0
    at(1, 0, 1, 1) = at(1, 1, 1, 0) = 0.0;
    at(0, 0, 1, 1) = prd;
    at(1, 1, 0, 0) = prd;                    // int R' P = [RP] - int R P'
    at(1, 0, 0, 1) = at(0, 1, 1, 0) = -prd;
    at(0, 1, 0, 1) = dpdp;
    at(0, 1, 1, 1) = at(1, 1, 0, 1) = dpdr;
    at(1, 1, 1, 1) = drdr;
    return c;
  }();
  return table;
}

}  // namespace bumpdetail

/// Power moments int_0^1 s^j profile^{(deriv)}(s) ds of a unit profile,
/// deriv <= 1. The first-derivative moments are derived from the value
/// moments by parts (the profiles are flat at both endpoints), so solver
/// moment vectors and verification integrals share one set of constants.
inline const std::vector<double>& profile_power_moments(BumpKind kind, int deriv = 0) {
  CW_REQUIRE(deriv == 0 || deriv == 1, "profile_power_moments: deriv must be 0 or 1");
  const int which = (kind == BumpKind::Plateau) ? 0 : 1;
  if (deriv == 0) return bumpdetail::value_power_moments()[std::size_t(which)];
  static const auto d1 = [] {
    std::array<std::vector<double>, 2> t;
    for (int w = 0; w < 2; ++w) {
      const auto& m0 = bumpdetail::value_power_moments()[std::size_t(w)];
      t[w].push_back(0.0);
      for (int j = 1; j < bumpdetail::kMomentPowers; ++j)
        t[w].push_back(-double(j) * m0[std::size_t(j - 1)]);
    }
    return t;
  }();
  return d1[std::size_t(which)];
}

/// int_0^1 A^{(da)}(s) B^{(db)}(s) ds for unit profiles A, B; da, db <= 1.
inline double cross_profile_moment(BumpKind ka, int da, BumpKind kb, int db) {
  CW_REQUIRE(da >= 0 && da <= 1 && db >= 0 && db <= 1,
             "cross_profile_moment: derivative orders must be 0 or 1");
  const int ia = ((ka == BumpKind::Plateau) ? 0 : 2) + da;
  const int ib = ((kb == BumpKind::Plateau) ? 0 : 2) + db;
  return bumpdetail::cross_profile_constants()[std::size_t(ia)][std::size_t(ib)];
}

inline const BumpProfileMetadata& bump_profile_metadata() {
  static const BumpProfileMetadata meta = [] {
    BumpProfileMetadata m;
    m.plateau_middle_third_min = bumpdetail::plateau_deriv(0, 1.0 / 3.0);
    m.ramp_central_lo = 4.0 / 9.0;
    m.ramp_central_hi = 5.0 / 9.0;
    double slope = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 256; ++i) {
      double s = m.ramp_central_lo + (m.ramp_central_hi - m.ramp_central_lo) * i / 256.0;
      slope = std::min(slope, bumpdetail::ramp_deriv(1, s));
    }
    m.ramp_central_slope = slope;
    m.c_bump = std::max({1.0, 1.0 / m.plateau_middle_third_min, 1.0 / m.ramp_central_slope});
    m.plateau_ramp_pairing = cross_profile_moment(BumpKind::Plateau, 0, BumpKind::Ramp, 1);
    for (int k = 0; k <= bumpdetail::kMaxDerivOrder; ++k) {
      double pe = 0.0, ra = 0.0;
      for (int i = 0; i <= 4096; ++i) {
        double s = double(i) / 4096.0;
        pe = std::max(pe, std::abs(bumpdetail::plateau_deriv(k, s)));
        ra = std::max(ra, std::abs(bumpdetail::ramp_deriv(k, s)));
      }
      m.plateau_deriv_sup.push_back(pe);
      m.ramp_deriv_sup.push_back(ra);
    }
    return m;
  }();
  return meta;
}

/// One scaled bump: the chosen unit profile transplanted to [u,v] and scaled
/// so its sup equals |amplitude|. Value and all derivatives through `order`
/// (and beyond, up to order 12) vanish identically at u and v.
struct BumpTerm {
  BumpKind kind = BumpKind::Plateau;
  double u = 0.0, v = 1.0;
  double amplitude = 0.0;
  int order = 0;  // smoothness bookkeeping: derivative orders callers rely on

  bool contains(double x) const { return x > u && x < v; }

  double eval_derivative(int k, double x) const {
    CW_REQUIRE(v > u, "BumpTerm: empty support");
    if (x <= u || x >= v) return 0.0;
    const double h = v - u;
    const double s = (x - u) / h;
    const double unit = (kind == BumpKind::Plateau) ? bumpdetail::plateau_deriv(k, s)
                                                    : bumpdetail::ramp_deriv(k, s);
    return amplitude * unit / std::pow(h, k);
  }
};

}  // namespace cw
