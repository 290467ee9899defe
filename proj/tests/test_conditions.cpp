#include <catch2/catch_amalgamated.hpp>

#include <cw/compact_set.hpp>
#include <cw/conditions.hpp>
#include <cw/counterexample.hpp>
#include <cw/group.hpp>
#include <cw/jets.hpp>
#include <cw/polynomial.hpp>

#include "test_support.hpp"

#include <cmath>
#include <vector>

using namespace cw;
using cw::testing::make_rng;
using cw::testing::random_polynomial;
using cw::testing::uniform;

namespace {

WhitneyField lifted_polynomial_field(const std::vector<Polynomial>& comps, int m, double a,
                                     double b) {
    WhitneyField f;
    f.r = int(comps.size());
    f.m = m;
    f.K = CompactSet::intervals({{a, b}});
    for (const Polynomial& p : comps) f.horizontal.push_back(FieldComponent::polynomials({p}));
    for (auto [i, j] : vertical_pairs(f.r)) {
        const Polynomial& fi = comps[std::size_t(i - 1)];
        const Polynomial& fj = comps[std::size_t(j - 1)];
        const Polynomial area = (0.5 * (fi * fj.derivative() - fi.derivative() * fj)).antiderivative();
        f.vertical.push_back(FieldComponent::polynomials({area}));
    }
    return f;
}

// The corrected defects for r = 3, written out term by term. The loop based
// evaluator must agree with these for every coefficient choice.
double e21_r3(const PairDefects& d, double c3, double t3) {
    return d.at(2, 1) - t3 * d.at(3, 1) + c3 * d.at(3, 2);
}
double e31_r3(const PairDefects& d, double c2, double t2) {
    return d.at(3, 1) - t2 * d.at(2, 1) - c2 * d.at(3, 2);
}
double e32_r3(const PairDefects& d, double c1, double t1) {
    return d.at(3, 2) + t1 * d.at(2, 1) - c1 * d.at(3, 1);
}

// Pair (2,1) for r = 4, including the quadratic cross term on the pair
// (4,3) of free labels.
double e21_r4(const PairDefects& d, double c3, double c4, double t3, double t4) {
    return d.at(2, 1) - t3 * d.at(3, 1) - t4 * d.at(4, 1) + c3 * d.at(3, 2) + c4 * d.at(4, 2) +
           (c3 * t4 - t3 * c4) * d.at(4, 3);
}

}  // namespace

TEST_CASE("pair defect vanishes on lifted low degree curves") {
    auto rng = make_rng(31);
    for (int m : {1, 2, 3}) {
        std::vector<Polynomial> comps;
        for (int i = 0; i < 3; ++i) comps.push_back(random_polynomial(rng, m));
        const WhitneyField f = lifted_polynomial_field(comps, m, 0.0, 1.0);
        for (auto [i, j] : vertical_pairs(3))
            for (auto [a, b] : {std::pair{0.0, 1.0}, {0.1, 0.35}, {0.6, 0.61}})
                CHECK(condition_defect(f, i, j, a, b) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("pair defect is invariant under left translation") {
    auto rng = make_rng(32);
    const int r = 3, m = 2;
    std::vector<Polynomial> comps;
    for (int i = 0; i < r; ++i) comps.push_back(random_polynomial(rng, 4));
    WhitneyField f = lifted_polynomial_field(comps, m, 0.0, 1.0);
    // Perturb the vertical layer so defects are genuinely nonzero.
    f.vertical[0] = FieldComponent::polynomials(
        {f.component_vertical(2, 1).polys()[0] + Polynomial({0.0, 0.0, 0.0, 0.4})});

    GroupElement g = GroupElement::identity(r);
    g.x = {0.7, -1.3, 2.1};
    g.xv = {0.5, -0.2, 0.9};

    WhitneyField tf = f;
    for (int i = 1; i <= r; ++i)
        tf.horizontal[std::size_t(i - 1)] = FieldComponent::polynomials(
            {f.component_horizontal(i).polys()[0] + Polynomial({g.x[std::size_t(i - 1)]})});
    for (auto [i, j] : vertical_pairs(r)) {
        const Polynomial& fi = f.component_horizontal(i).polys()[0];
        const Polynomial& fj = f.component_horizontal(j).polys()[0];
        const Polynomial shifted =
            f.component_vertical(i, j).polys()[0] +
            Polynomial({g.xv[vertical_pair_index(i, j, r)]}) +
            0.5 * (g.x[std::size_t(i - 1)] * fj - g.x[std::size_t(j - 1)] * fi);
        tf.vertical[vertical_pair_index(i, j, r)] = FieldComponent::polynomials({shifted});
    }

    for (auto [i, j] : vertical_pairs(r)) {
        for (auto [a, b] : {std::pair{0.0, 1.0}, {0.2, 0.45}, {0.9, 0.95}}) {
            const double base = condition_defect(f, i, j, a, b);
            const double moved = condition_defect(tf, i, j, a, b);
            CHECK(moved == Catch::Approx(base).margin(1e-11 * (1.0 + std::abs(base))));
        }
    }
}

TEST_CASE("signed ratio and closed form on the first accumulation gap") {
    const CounterexampleInstance inst = build_counterexample(3);
    const auto [a, b] = inst.gap_family[0];
    CHECK(a == Catch::Approx(0.625));
    CHECK(b == Catch::Approx(0.75));

    const AVSample s = compute_av(inst.field, 2, 1, a, b);
    CHECK(s.A == Catch::Approx(-0.09).epsilon(1e-12));
    const double h = b - a;
    CHECK(s.V == Catch::Approx(std::pow(h, 4) + std::pow(h , 3)).epsilon(1e-12));
    CHECK(s.ratio == Catch::Approx(-40.96).epsilon(1e-12));

    // The other pairs carry no vertical data and no area, hence no defect.
    CHECK(compute_av(inst.field, 3, 1, a, b).A == Catch::Approx(0.0).margin(1e-15));
    CHECK(compute_av(inst.field, 3, 2, a, b).A == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("coefficient bookkeeping between compact and full vectors") {
    CHECK(coefficient_index_set(5, 4, 2) == std::vector<int>{1, 3, 5});
    CHECK(coefficient_index_set(2, 2, 1).empty());
    const auto full = expand_coefficients(5, 4, 2, {10.0, 20.0, 30.0});
    CHECK(full == std::vector<double>{10.0, 0.0, 20.0, 0.0, 30.0});
    CHECK_THROWS_AS(expand_coefficients(5, 4, 2, {1.0}), std::invalid_argument);
}

TEST_CASE("corrected defect agrees with the written out combinations") {
    auto rng = make_rng(40);
    for (int trial = 0; trial < 25; ++trial) {
        PairDefects d3;
        d3.r = 3;
        d3.A = {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2)};
        const double c = uniform(rng, -3, 3), t = uniform(rng, -3, 3);
        CHECK(conddetail::combine_defects(d3, 2, 1, expand_coefficients(3, 2, 1, {c}),
                                          expand_coefficients(3, 2, 1, {t})) ==
              Catch::Approx(e21_r3(d3, c, t)).margin(1e-13));
        CHECK(conddetail::combine_defects(d3, 3, 1, expand_coefficients(3, 3, 1, {c}),
                                          expand_coefficients(3, 3, 1, {t})) ==
              Catch::Approx(e31_r3(d3, c, t)).margin(1e-13));
        CHECK(conddetail::combine_defects(d3, 3, 2, expand_coefficients(3, 3, 2, {c}),
                                          expand_coefficients(3, 3, 2, {t})) ==
              Catch::Approx(e32_r3(d3, c, t)).margin(1e-13));

        PairDefects d4;
        d4.r = 4;
        d4.A.resize(6);
        for (double& v : d4.A) v = uniform(rng, -2, 2);
        const double c3 = uniform(rng, -3, 3), c4 = uniform(rng, -3, 3);
        const double t3 = uniform(rng, -3, 3), t4 = uniform(rng, -3, 3);
        CHECK(conddetail::combine_defects(d4, 2, 1, expand_coefficients(4, 2, 1, {c3, c4}),
                                          expand_coefficients(4, 2, 1, {t3, t4})) ==
              Catch::Approx(e21_r4(d4, c3, c4, t3, t4)).margin(1e-13));
    }
}

TEST_CASE("combination reproduces the pairing of corrected components") {
    // The same coefficients applied to the pointwise pairings a_pq must
    // reproduce the pairing of the corrected components exactly; this is the
    // cancellation that makes the corrected defect meaningful.
    auto rng = make_rng(41);
    for (int r : {3, 4, 5}) {
        for (auto [i, j] : vertical_pairs(r)) {
            std::vector<Polynomial> comps;
            for (int k = 0; k < r; ++k) comps.push_back(random_polynomial(rng, 3));
            std::vector<double> c, t;
            for (int k = 0; k < r - 2; ++k) {
                c.push_back(uniform(rng, -2, 2));
                t.push_back(uniform(rng, -2, 2));
            }
            CHECK(algebraic_identity_residual(comps, i, j, c, t, 0.0, 1.0) < 1e-10);
        }
    }
}

TEST_CASE("zero coefficients reduce the corrected sample to the plain one") {
    auto rng = make_rng(42);
    std::vector<Polynomial> comps;
    for (int k = 0; k < 4; ++k) comps.push_back(random_polynomial(rng, 3));
    WhitneyField f = lifted_polynomial_field(comps, 2, 0.0, 1.0);
    f.vertical[2] = FieldComponent::polynomials(
        {f.component_vertical(3, 2).polys()[0] + Polynomial({0.0, 0.0, 0.7})});

    for (auto [i, j] : vertical_pairs(4)) {
        const AVSample plain = compute_av(f, i, j, 0.1, 0.8);
        const std::vector<double> zero(2, 0.0);
        const GeneralizedAVSample gen = compute_generalized(f, i, j, 0.1, 0.8, zero, zero);
        CHECK(gen.E == Catch::Approx(plain.A).margin(1e-13));
        CHECK(gen.denom == Catch::Approx(plain.V).epsilon(1e-12));
        CHECK(gen.ratio == Catch::Approx(std::abs(plain.ratio)).margin(1e-12));
    }
}

TEST_CASE("correction masses measure the approximation residuals") {
    // Components t, 0, -t: correcting component 1 by -1 times component 3
    // cancels its derivative entirely.
    const CounterexampleInstance inst = build_counterexample(2);
    const auto [a, b] = inst.gap_family[0];
    const GeneralizedAVSample g =
        compute_generalized(inst.field, 2, 1, a, b, {-1.0}, {0.0});
    CHECK(g.delta_i == Catch::Approx(0.0).margin(1e-14));
    CHECK(g.delta_j == Catch::Approx(0.0).margin(1e-14));
    CHECK(g.denom == Catch::Approx(std::pow(b - a, 4)).epsilon(1e-12));
    CHECK(g.E == Catch::Approx(-0.09).epsilon(1e-12));
    CHECK(g.ratio == Catch::Approx(368.64).epsilon(1e-12));

    // A positive coefficient doubles the mass instead.
    const GeneralizedAVSample worse =
        compute_generalized(inst.field, 2, 1, a, b, {1.0}, {0.0});
    CHECK(worse.delta_j == Catch::Approx(2.0 * (b - a)).epsilon(1e-12));
}

TEST_CASE("audit candidates find the cancelling coefficients") {
    const CounterexampleInstance inst = build_counterexample(4);
    const auto [a, b] = inst.gap_family[0];
    const GeneralizedAuditRow row = audit_generalized_pair(inst.field, 2, 1, a, b);

    CHECK(row.av.ratio == Catch::Approx(-40.96).epsilon(1e-12));
    CHECK(row.best.ratio == Catch::Approx(368.64).epsilon(1e-9));
    CHECK(row.best.c.size() == 1);
    CHECK(row.best.c[0] == Catch::Approx(-1.0).margin(1e-9));

    bool l2_hits = false, grid_present = false;
    for (const auto& cand : row.candidates) {
        if (cand.source == "l2_c" && std::abs(cand.g.ratio - 368.64) < 1e-6) l2_hits = true;
        if (cand.source == "grid") {
            grid_present = true;
            CHECK(cand.g.ratio == Catch::Approx(368.64).epsilon(1e-9));
        }
    }
    CHECK(l2_hits);
    CHECK(grid_present);
}

TEST_CASE("closed forms and opposite trends across the gap family") {
    const int levels = 6;
    const CounterexampleInstance inst = build_counterexample(levels);

    std::vector<double> plain, corrected;
    for (int n = 1; n <= levels; ++n) {
        const auto [a, b] = inst.gap_family[std::size_t(n - 1)];
        const AVSample s = compute_av(inst.field, 2, 1, a, b);
        const double expected_plain =
            -57.6 * std::pow(0.8, n) / (1.0 + std::pow(2.0, -n - 2));
        CHECK(s.ratio == Catch::Approx(expected_plain).epsilon(1e-12));
        plain.push_back(s.ratio);

        const GeneralizedAVSample g =
            compute_generalized(inst.field, 2, 1, a, b, {-1.0}, {0.0});
        CHECK(g.ratio == Catch::Approx(230.4 * std::pow(1.6, n)).epsilon(1e-12));
        corrected.push_back(g.ratio);
    }
    for (int n = 1; n < levels; ++n) {
        CHECK(std::abs(plain[std::size_t(n)] / plain[std::size_t(n - 1)]) < 1.0);
        CHECK(corrected[std::size_t(n)] / corrected[std::size_t(n - 1)] ==
              Catch::Approx(1.6).epsilon(1e-12));
    }

    const GeneralizedAudit audit = audit_generalized(inst.field, inst.gap_family);
    CHECK(audit.component_trend.classification == TrendClass::Decaying);
    CHECK(audit.component_trend.slope_per_level ==
          Catch::Approx(std::log2(0.8)).margin(0.06));
    CHECK(audit.generalized_trend.classification == TrendClass::Growing);
    CHECK(audit.generalized_trend.slope_per_level ==
          Catch::Approx(std::log2(1.6)).margin(0.05));
}

TEST_CASE("knot spans enumerate increasing pairs only") {
    const CompactSet K = CompactSet::intervals({{0.0, 0.1}, {0.5, 0.5}, {0.8, 1.0}});
    const auto spans = knot_spans(K);
    CHECK(spans.size() == 10);  // 5 knots, all increasing pairs
    for (auto [a, b] : spans) CHECK(a < b);
}
