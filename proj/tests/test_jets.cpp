#include <catch2/catch_amalgamated.hpp>

#include <cw/compact_set.hpp>
#include <cw/counterexample.hpp>
#include <cw/group.hpp>
#include <cw/jets.hpp>
#include <cw/polynomial.hpp>
#include <cw/trend.hpp>

#include "test_support.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace cw;
using cw::testing::make_rng;
using cw::testing::random_polynomial;
using cw::testing::uniform;

namespace {

// Field with polynomial horizontal components on one interval and exact
// pairing antiderivatives as the vertical layer, so compatibility holds by
// construction.
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

}  // namespace

TEST_CASE("compact set knots, gaps, and membership") {
    const CompactSet pts = CompactSet::points({0.7, 0.1, 0.4});
    CHECK(pts.is_points());
    CHECK(pts.knots() == std::vector<double>{0.1, 0.4, 0.7});
    CHECK(pts.gaps() == std::vector<std::pair<double, double>>{{0.1, 0.4}, {0.4, 0.7}});
    CHECK(pts.diameter() == Catch::Approx(0.6));
    CHECK(pts.part_containing(0.4) == 1);
    CHECK(pts.part_containing(0.41) == -1);
    CHECK(pts.part_containing(0.41, 0.02) == 1);

    const CompactSet iv = CompactSet::intervals({{0.0, 0.25}, {0.5, 0.5}, {0.75, 1.0}});
    CHECK_FALSE(iv.is_points());
    CHECK(iv.knots() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(iv.gaps() == std::vector<std::pair<double, double>>{{0.25, 0.5}, {0.5, 0.75}});
    CHECK(iv.part_containing(0.5) == 1);
    CHECK(iv.contains(0.1));
    CHECK_FALSE(iv.contains(0.3));

    CHECK_THROWS_AS(CompactSet::points({0.2, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(CompactSet::intervals({{0.0, 0.4}, {0.3, 0.6}}), std::invalid_argument);
}

TEST_CASE("dyadic trend summary classifies synthetic data") {
    // value = 8 * w^0.5 over widths 2^-1 .. 2^-8: halving the width divides
    // the value by sqrt(2), a decaying trend with slope -0.5.
    std::vector<std::pair<double, double>> dec, gro, fla;
    for (int n = 1; n <= 8; ++n) {
        const double w = std::pow(2.0, -n);
        dec.emplace_back(w, 8.0 * std::sqrt(w));
        gro.emplace_back(w, 0.01 / w);
        fla.emplace_back(w, 3.0);
    }
    const DyadicSummary sd = summarize_dyadic(dec);
    CHECK(sd.buckets.size() == 8);
    CHECK(sd.buckets.front().level == -8);
    CHECK(sd.slope_per_level == Catch::Approx(-0.5).margin(1e-9));
    CHECK(sd.classification == TrendClass::Decaying);

    CHECK(summarize_dyadic(gro).classification == TrendClass::Growing);
    CHECK(summarize_dyadic(gro).slope_per_level == Catch::Approx(1.0).margin(1e-9));
    CHECK(summarize_dyadic(fla).classification == TrendClass::Flat);
    CHECK(std::string(trend_name(TrendClass::Growing)) == "growing");
}

TEST_CASE("field jets in both representations") {
    // One component, pointwise storage on three knots.
    WhitneyField f;
    f.r = 2;
    f.m = 2;
    f.K = CompactSet::points({0.0, 0.5, 1.0});
    f.horizontal.push_back(FieldComponent::pointwise({{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}, {2.0, -1.0, 0.5}}));
    f.horizontal.push_back(FieldComponent::pointwise({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}));
    f.vertical.push_back(FieldComponent::pointwise({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}));

    CHECK(f.jet_horizontal(1, 0.0) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(f.jet_horizontal(1, 0.5 + 1e-14) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(f.jet_horizontal(1, 0.3), std::invalid_argument);

    const Polynomial t = f.taylor_horizontal(1, 0.0);
    CHECK(t(0.0) == Catch::Approx(1.0));
    CHECK(t.derivative()(0.0) == Catch::Approx(2.0));
    CHECK(t.derivative().derivative()(0.0) == Catch::Approx(3.0));
    CHECK(t(0.1) == Catch::Approx(1.0 + 2.0 * 0.1 + 1.5 * 0.01));

    CHECK(field_scale(f) == Catch::Approx(3.0));

    // Polynomial storage: jets exist at interior points too.
    const Polynomial p({0.0, 0.0, 1.0});  // x^2
    WhitneyField g;
    g.r = 2;
    g.m = 1;
    g.K = CompactSet::intervals({{0.0, 1.0}});
    g.horizontal = {FieldComponent::polynomials({p}), FieldComponent::polynomials({p})};
    g.vertical = {FieldComponent::polynomials({Polynomial{}})};
    CHECK(g.jet_horizontal(1, 0.3) == std::vector<double>{0.09, 0.6});
    const Polynomial re = g.taylor_horizontal(1, 0.25);
    CHECK(re(0.8) == Catch::Approx(0.25 * 0.25 + 0.5 * (0.8 - 0.25)));
}

TEST_CASE("remainder audit flags the plateau jump at the expected size") {
    // Two plateau values 0.1 and 0.01 separated by 0.125 give a zeroth order
    // remainder of -0.09 and a scaled value of 0.09 / 0.125^2 = 5.76.
    const CounterexampleInstance inst = build_counterexample(3);
    const WhitneyField& f = inst.field;
    const FieldComponent& f21 = f.component_vertical(2, 1);

    const RemainderReport one =
        remainder_audit_component(f, f21, "21", {{0.625, 0.75}, {0.3, 0.3}});
    CHECK(one.skipped_degenerate == 1);
    REQUIRE(one.rows.size() == 3);
    CHECK(one.rows[0].k == 0);
    CHECK(one.rows[0].remainder == Catch::Approx(-0.09).epsilon(1e-12));
    CHECK(one.rows[0].scaled == Catch::Approx(5.76).epsilon(1e-12));
    CHECK(one.max_scaled == Catch::Approx(5.76).epsilon(1e-12));

    // The full audit covers all components and both orientations of every
    // knot pair, and the horizontal components contribute nothing: they are
    // restrictions of global degree <= m polynomials.
    const RemainderReport all = remainder_audit(f);
    double worst_horizontal = 0.0;
    for (const auto& row : all.rows)
        if (row.component.size() == 1) worst_horizontal = std::max(worst_horizontal, row.scaled);
    CHECK(worst_horizontal < 1e-9);
    CHECK(all.max_scaled >= 5.76 - 1e-9);
}

TEST_CASE("horizontal compatibility accepts pairings and rejects corruption") {
    auto rng = make_rng(2024);
    for (int m : {1, 2, 3}) {
        std::vector<Polynomial> comps;
        for (int i = 0; i < 3; ++i) comps.push_back(random_polynomial(rng, m));
        WhitneyField f = lifted_polynomial_field(comps, m, 0.2, 1.1);
        const CompatibilityReport ok = check_horizontal_compatibility(f);
        CHECK(ok.pass);
        for (const auto& pr : ok.pairs) CHECK(pr.max_residual <= 1e-10 * ok.scale);

        // Adding 0.1 t to one vertical component shifts its first order jet
        // by 0.1 everywhere, far past the tolerance.
        WhitneyField bad = f;
        Polynomial v = bad.component_vertical(2, 1).polys()[0];
        bad.vertical[vertical_pair_index(2, 1, 3)] =
            FieldComponent::polynomials({v + Polynomial({0.0, 0.1})});
        const CompatibilityReport rej = check_horizontal_compatibility(bad);
        CHECK_FALSE(rej.pass);
        const CompatibilityPair& worst = rej.pairs[vertical_pair_index(2, 1, 3)];
        CHECK(worst.max_residual == Catch::Approx(0.1).epsilon(1e-9));
        CHECK(worst.worst_order == 1);
    }
}

TEST_CASE("two point interpolation reproduces low degree polynomials") {
    auto rng = make_rng(77);
    for (int m = 1; m <= 4; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            const Polynomial p = random_polynomial(rng, 2 * m + 1);
            const double a = uniform(rng, -1.0, 0.0);
            const double b = a + uniform(rng, 0.1, 2.0);
            std::vector<double> jl, jr;
            for (int k = 0; k <= m; ++k) {
                jl.push_back(p.eval_derivative(k, a));
                jr.push_back(p.eval_derivative(k, b));
            }
            const Polynomial h = hermite_extend_gap(jl, jr, a, b);
            for (double s : {0.0, 0.31, 0.5, 0.77, 1.0}) {
                const double x = a + s * (b - a);
                CHECK(h(x) == Catch::Approx(p(x)).margin(1e-9 * (1.0 + std::abs(p(x)))));
            }
        }
    }
}

TEST_CASE("two point interpolation matches arbitrary end jets") {
    auto rng = make_rng(78);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + trial % 3;
        const double a = uniform(rng, 0.0, 0.5);
        const double b = a + uniform(rng, 0.05, 1.0);
        std::vector<double> jl, jr;
        for (int k = 0; k <= m; ++k) {
            jl.push_back(uniform(rng, -2.0, 2.0));
            jr.push_back(uniform(rng, -2.0, 2.0));
        }
        const Polynomial h = hermite_extend_gap(jl, jr, a, b);
        CHECK(h.degree() <= 2 * m + 1);
        for (int k = 0; k <= m; ++k) {
            CHECK(h.eval_derivative(k, a) == Catch::Approx(jl[std::size_t(k)]).margin(1e-8));
            CHECK(h.eval_derivative(k, b) == Catch::Approx(jr[std::size_t(k)]).margin(1e-8));
        }
    }
}

TEST_CASE("counterexample geometry and plateau data") {
    const CounterexampleInstance inst = build_counterexample(4);
    const WhitneyField& f = inst.field;
    CHECK(f.r == 3);
    CHECK(f.m == 2);
    REQUIRE(f.K.part_count() == 5);
    CHECK(f.K.interval_list()[0] == std::pair<double, double>{0.5, 0.625});
    CHECK(f.K.interval_list()[4].first == Catch::Approx(1.0 - std::pow(2.0, -5)));
    CHECK(f.K.interval_list()[4].first == f.K.interval_list()[4].second);
    CHECK(f.K.knots().size() == 9);

    REQUIRE(inst.gap_family.size() == 4);
    for (int n = 1; n <= 4; ++n) {
        const auto [ga, gb] = inst.gap_family[std::size_t(n - 1)];
        CHECK(gb - ga == Catch::Approx(std::pow(2.0, -n - 2)).epsilon(1e-14));
    }

    CHECK(f.value_vertical(2, 1, 0.5) == Catch::Approx(0.1));
    CHECK(f.value_vertical(2, 1, 0.75) == Catch::Approx(0.01));
    CHECK(f.value_vertical(3, 1, 0.75) == 0.0);
    CHECK(f.value_horizontal(1, 0.625) == Catch::Approx(0.625));
    CHECK(f.value_horizontal(3, 0.625) == Catch::Approx(-0.625));

    // The jump between plateau levels is invisible to the compatibility
    // check (it constrains orders >= 1 only), so the field passes it.
    CHECK(check_horizontal_compatibility(f).pass);
}
