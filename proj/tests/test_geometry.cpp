#include <doctest.h>

#include <cmath>
#include <utility>

#include "msalab/geometry.hpp"

using namespace msalab;

TEST_CASE("snap_6n fixed points and rounding") {
    CHECK(snap_6n(6.0) == 6);
    CHECK(snap_6n(13.0) == 12);
    CHECK(snap_6n(41.57) == 36); // 12^1.5
    CHECK(snap_6n(216.0) == 216);
    CHECK_THROWS_AS(snap_6n(5.9), validation_error);
}

TEST_CASE("snap_6n is idempotent and monotone") {
    double prev = 6;
    for (double k = 6.0; k < 500.0; k += 0.7) {
        const int s = snap_6n(k);
        CHECK(snap_6n(static_cast<double>(s)) == s);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("site sets and belts") {
    SUBCASE("d=1 L=2 single site") {
        const BoxSpec b(make_site(0), 2, 1);
        const auto ss = sites(b);
        REQUIRE(ss.size() == 1);
        CHECK(ss[0] == make_site(0));
    }
    SUBCASE("d=2 L=6 cardinalities") {
        const BoxSpec b(make_site(0, 0), 6, 2);
        CHECK(sites(b).size() == 25);
        // the belt is the symmetric outermost ring, 25 - 9 sites at L=6
        CHECK(belt_indices(b).size() == 16);
        CHECK(belt_indices(b).size() == static_cast<std::size_t>(b.belt_count()));
    }
    SUBCASE("sites minus belt is the interior box for even L >= 4") {
        for (int d = 1; d <= 2; ++d)
            for (int l = 4; l <= 12; l += 2) {
                const BoxSpec b(make_site(3, d > 1 ? -2 : 0), l, d);
                const auto interior = b.site_count() - static_cast<std::int64_t>(belt_indices(b).size());
                std::int64_t want = 1;
                for (int i = 0; i < d; ++i) want *= l - 3;
                CHECK(interior == want);
            }
    }
    SUBCASE("lexicographic order is the index map") {
        const BoxSpec b(make_site(-1, 2), 6, 2);
        const auto ss = sites(b);
        for (std::size_t i = 0; i < ss.size(); ++i)
            CHECK(site_index(b, ss[i]) == static_cast<std::int64_t>(i));
        for (std::size_t i = 1; i < ss.size(); ++i) CHECK(ss[i - 1] < ss[i]);
    }
}

TEST_CASE("is_inside_thick matches brute-force site inclusion") {
    const BoxSpec outer(make_site(0, 0), 36, 2);
    auto brute = [&](const BoxSpec& inner) {
        // every inner site inside the side-(L-3) lattice box around the outer center
        const std::int64_t r = (outer.side - 3 - 2) / 2; // floor((M-2)/2) with M = L-3
        for (const auto& s : sites(inner))
            if (chebyshev(s, outer.center, 2) > r) return false;
        return true;
    };
    CHECK(is_inside_thick(BoxSpec(make_site(0, 0), 6, 2), outer));
    CHECK_FALSE(is_inside_thick(BoxSpec(make_site(14, 0), 6, 2), outer));
    for (std::int64_t x = 10; x <= 16; ++x) {
        const BoxSpec inner(make_site(x, 0), 6, 2);
        CHECK(is_inside_thick(inner, outer) == brute(inner));
    }
    CHECK_THROWS_AS((void)is_inside_thick(BoxSpec(make_site(0, 0), 34, 2), outer), validation_error);
    CHECK_THROWS_AS((void)is_inside_thick(BoxSpec(make_site(0), 12, 1), BoxSpec(make_site(0), 12, 1)),
                    validation_error);
}

TEST_CASE("nonoverlapping is the strict center-distance inequality") {
    const Separation rho0{0};
    CHECK(nonoverlapping(BoxSpec(make_site(0), 12, 1), BoxSpec(make_site(13), 12, 1), rho0));
    CHECK_FALSE(nonoverlapping(BoxSpec(make_site(0), 12, 1), BoxSpec(make_site(12), 12, 1), rho0));
    CHECK(nonoverlapping(BoxSpec(make_site(27, 3), 36, 2), BoxSpec(make_site(0, 0), 12, 2), Separation{2}));
    SUBCASE("symmetry in the box arguments") {
        for (std::int64_t dx = 10; dx <= 30; ++dx) {
            const BoxSpec a(make_site(0), 12, 1), b(make_site(dx), 18, 1);
            CHECK(nonoverlapping(a, b, rho0) == nonoverlapping(b, a, rho0));
        }
    }
}

TEST_CASE("cell grid cardinality and covering") {
    SUBCASE("spec pair L=36, ell=12") {
        const CellGrid grid(BoxSpec(make_site(0, 0), 36, 2), 12);
        CHECK(static_cast<double>(grid.centers().size()) <= std::pow(3.0 * 36 / 12 + 1, 2));
        CHECK(grid.covers_parent());
        for (const auto& c : grid.covering_family())
            CHECK(is_inside_thick(BoxSpec(c, 12, 2), grid.parent()));
    }
    SUBCASE("enumeration over small pitches, L <= 48, d <= 2") {
        for (int d = 1; d <= 2; ++d)
            for (int l = 12; l <= 48; l += 6)
                for (int ell = 6; ell <= 18 && 2 * ell <= l; ell += 6) {
                    const CellGrid grid(BoxSpec(make_site(0, 0), l, d), ell);
                    double bound = 1;
                    for (int i = 0; i < d; ++i) bound *= 3.0 * l / ell + 1;
                    CHECK(static_cast<double>(grid.centers().size()) <= bound);
                    CHECK(grid.covers_parent());
                }
    }
    SUBCASE("schedule-produced pairs cover") {
        // consecutive power-mode scales and one geometric rung
        const std::pair<int, int> pairs[] = {{18, 12}, {36, 18}, {84, 36}, {252, 84}, {132, 12}};
        for (auto [l, ell] : pairs) {
            const CellGrid grid(BoxSpec(make_site(0), l, 1), ell);
            CHECK(grid.covers_parent());
        }
    }
    SUBCASE("pathological pitch is rejected") {
        CHECK_THROWS_AS(CellGrid(BoxSpec(make_site(0), 30, 1), 24), validation_error);
    }
}
