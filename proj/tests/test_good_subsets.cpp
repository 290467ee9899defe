#include <catch2/catch_amalgamated.hpp>

#include <cw/good_subsets.hpp>
#include <cw/group.hpp>

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace cw;

namespace {

std::vector<std::pair<double, double>> all_slots(const GoodSubsets& gs) {
    std::vector<std::pair<double, double>> out;
    for (auto [i, j] : vertical_pairs(gs.r()))
        for (int s = 0; s < gs.block_count(); ++s) out.push_back(gs.slot(i, j, s));
    return out;
}

bool pairwise_disjoint(std::vector<std::pair<double, double>> slots) {
    std::sort(slots.begin(), slots.end());
    for (std::size_t t = 0; t + 1 < slots.size(); ++t)
        if (slots[t].second > slots[t + 1].first + 1e-15) return false;
    return true;
}

// Every window of the stated width must contain a complete slot of every
// pair; this is what lets the synthesis work inside a Markov window of the
// reference derivative.
bool windows_contain_all_pairs(const GoodSubsets& gs, double width) {
    const double a = gs.a(), b = gs.b();
    for (int step = 0; step <= 200; ++step) {
        const double w0 = a + (b - a - width) * step / 200.0;
        for (auto [i, j] : vertical_pairs(gs.r())) {
            bool found = false;
            for (int s = 0; s < gs.block_count() && !found; ++s) {
                const auto [lo, hi] = gs.slot(i, j, s);
                found = lo >= w0 - 1e-15 && hi <= w0 + width + 1e-15;
            }
            if (!found) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("block counts are the minimal admissible values") {
    CHECK(GoodSubsets::minimal_block_count(3, 0, 1) == 9);
    CHECK(GoodSubsets::minimal_block_count(3, 0, 2) == 33);
    CHECK(GoodSubsets::minimal_block_count(3, 0, 3) == 73);
    CHECK(GoodSubsets::minimal_block_count(5, 2, 1) == 15);
    // Both constraints are strict inequalities.
    for (int r = 2; r <= 6; ++r)
        for (int R = 0; R <= 3; ++R)
            for (int m = 1; m <= 3; ++m) {
                const int L1 = GoodSubsets::minimal_block_count(r, R, m);
                CHECK(L1 > 2 * (r + R));
                CHECK(L1 > 8 * m * m);
                CHECK((L1 - 1 <= 2 * (r + R) || L1 - 1 <= 8 * m * m));
            }
}

TEST_CASE("slots tile blocks and stay inside the gap") {
    const GoodSubsets gs(2.0, 5.0, 3, 0, 2);
    CHECK(gs.block_count() == 33);
    CHECK(gs.slot_fraction() == Catch::Approx(1.0 / 99.0));

    const auto slots = all_slots(gs);
    CHECK(slots.size() == 3 * 33);
    CHECK(pairwise_disjoint(slots));
    for (auto [lo, hi] : slots) {
        CHECK(lo >= 2.0);
        CHECK(hi <= 5.0 + 1e-12);
        CHECK(hi - lo == Catch::Approx(3.0 / 99.0));
    }

    // Slot s of every pair lives inside block s.
    const double block = 3.0 / 33.0;
    for (auto [i, j] : vertical_pairs(3))
        for (int s = 0; s < 33; ++s) {
            const auto [lo, hi] = gs.slot(i, j, s);
            CHECK(lo >= 2.0 + s * block - 1e-12);
            CHECK(hi <= 2.0 + (s + 1) * block + 1e-12);
        }
}

TEST_CASE("windows of the Markov width contain a slot of every pair") {
    for (int m : {1, 2}) {
        const GoodSubsets gs(0.0, 1.0, 3, 0, m);
        CHECK(windows_contain_all_pairs(gs, 1.0 / (4.0 * m * m)));
    }
    const GoodSubsets wide(1.0, 4.0, 4, 1, 1);
    CHECK(windows_contain_all_pairs(wide, 3.0 / 4.0));
}

TEST_CASE("halving splits every slot and preserves the guarantees") {
    const GoodSubsets gs(0.0, 1.0, 3, 0, 1);
    const auto [left, right] = gs.halve();
    CHECK(left.slot_fraction() == Catch::Approx(gs.slot_fraction() / 2.0));

    std::vector<std::pair<double, double>> combined;
    for (auto [i, j] : vertical_pairs(3))
        for (int s = 0; s < gs.block_count(); ++s) {
            const auto full = gs.slot(i, j, s);
            const auto l = left.slot(i, j, s);
            const auto r = right.slot(i, j, s);
            CHECK(l.first == Catch::Approx(full.first));
            CHECK(l.second == Catch::Approx(r.first));
            CHECK(r.second == Catch::Approx(full.second));
            combined.push_back(l);
            combined.push_back(r);
        }
    CHECK(pairwise_disjoint(combined));
    CHECK(windows_contain_all_pairs(left, 0.25));
    CHECK(windows_contain_all_pairs(right, 0.25));

    // Halving twice keeps nesting inside the original slot.
    const auto [ll, lr] = left.halve();
    CHECK(ll.halvings() == 2);
    const auto s0 = gs.slot(2, 1, 0);
    const auto s2 = lr.slot(2, 1, 0);
    CHECK(s2.first >= s0.first);
    CHECK(s2.second <= s0.second);
}

TEST_CASE("dropping a component relabels survivors and keeps their slots") {
    const GoodSubsets gs(0.0, 1.0, 4, 0, 1);
    const GoodSubsets red = gs.without_component(3);
    CHECK(red.r() == 3);
    CHECK(red.R() == 1);
    CHECK(red.original_label(1) == 1);
    CHECK(red.original_label(2) == 2);
    CHECK(red.original_label(3) == 4);

    // Pair (3,2) in the reduced system is the original pair (4,2).
    for (int s = 0; s < gs.block_count(); ++s) {
        CHECK(red.slot(3, 2, s) == gs.slot(4, 2, s));
        CHECK(red.slot(2, 1, s) == gs.slot(2, 1, s));
    }

    // Reduced slots remain pairwise disjoint: they are a subset of the
    // original family.
    CHECK(pairwise_disjoint(all_slots(red)));

    // Dropping from a halved family keeps the halved geometry.
    const auto [p1, p2] = gs.halve();
    const GoodSubsets rp2 = p2.without_component(3);
    CHECK(rp2.slot(3, 2, 5) == p2.slot(4, 2, 5));
    CHECK(rp2.slot_fraction() == Catch::Approx(gs.slot_fraction() / 2.0));
}
