#include <doctest.h>

#include <cmath>

#include "msalab/msa.hpp"

using namespace msalab;

namespace {
const DisorderModel kFree{0.0, Distribution::UniformSym, 1};
const DisorderModel kLam8{8.0, Distribution::UniformSym, 0x5EED8};
const DisorderModel kLam2{2.0, Distribution::UniformSym, 0x5EED2};
}

TEST_CASE("regularity thresholds and classification") {
    SUBCASE("free d=1 L=12 at E=-1, Regular(0.1): threshold e^{-0.6}") {
        const auto op = assemble_box(kFree, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 0);
        const auto v = classify_box(op, RegularityParams{RegularityKind::Regular, 0.1, -1.0});
        CHECK(v.threshold == doctest::Approx(std::exp(-0.6)));
        CHECK(v.threshold == doctest::Approx(0.5488).epsilon(1e-3));
        // dense-oracle value of the norm decides the verdict
        const double dist = spectral_dist(op, -1.0);
        const double oracle = green_block_norm_dense(
            op, -1.0, belt_indices(op.box), subbox_indices(op.box, core_box(op.box, 4)), dist);
        CHECK(v.norm_value == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(v.regular() == (oracle <= v.threshold));
        CHECK(v.regular()); // free resolvent at spectral distance 1 decays well below e^{-0.6}
    }
    SUBCASE("energy in spectrum yields EnergyInSpectrum") {
        const auto op = assemble_box(kLam2, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 3);
        const double e = spectrum(op, false).eigenvalues[4];
        const auto v = classify_box(op, RegularityParams{RegularityKind::Regular, 0.3, e});
        CHECK(v.verdict == BoxVerdict::EnergyInSpectrum);
    }
    SUBCASE("side not in 6N is rejected") {
        const auto op = assemble_box(kFree, BoxSpec(make_site(0), 8, 1), Bc::Dirichlet, 0);
        CHECK_THROWS_AS((void)classify_box(op, RegularityParams{RegularityKind::Regular, 0.3, -1.0}),
                        validation_error);
    }
}

TEST_CASE("suitable <-> regular mass conversions") {
    CHECK(suitable_to_regular_mass(4.0, 12) == doctest::Approx(8.0 * std::log(12.0) / 12.0));
    CHECK(suitable_to_regular_mass(4.0, 12) == doctest::Approx(1.6566).epsilon(1e-4));
    CHECK(subexp_to_regular_mass(0.5, 16) == doctest::Approx(2.0 / 4.0));
    // threshold identity: L^-theta == e^{-mL/2} with m = 2 theta log L / L
    for (int l : {12, 36, 216})
        for (double theta : {1.5, 4.0}) {
            const double m = suitable_to_regular_mass(theta, l);
            CHECK(std::pow(l, -theta) == doctest::Approx(std::exp(-m * l / 2.0)).epsilon(1e-12));
        }
}

TEST_CASE("suitable and mass-equivalent regular verdicts agree on sampled instances") {
    // Suitable(theta) and Regular(2 theta log L / L) agree on every instance
    int checked = 0;
    for (int l : {12, 24})
        for (double theta : {1.0, 2.5, 4.0})
            for (std::int64_t t = 0; t < 40; ++t) {
                const auto op = assemble_box(kLam2, BoxSpec(make_site(0), l, 1), Bc::Dirichlet, t);
                const auto a = classify_box(op, RegularityParams{RegularityKind::Suitable, theta, 0.5});
                const auto b = classify_box(
                    op, RegularityParams{RegularityKind::Regular, suitable_to_regular_mass(theta, l), 0.5});
                CHECK(a.verdict == b.verdict);
                ++checked;
            }
    CHECK(checked == 240);
}

TEST_CASE("sub-exponential suitability matches its mass-equivalent regular form") {
    for (int l : {12, 24})
        for (double zeta : {0.3, 0.6, 0.9})
            for (std::int64_t t = 0; t < 20; ++t) {
                const auto op = assemble_box(kLam8, BoxSpec(make_site(0), l, 1), Bc::Dirichlet, t);
                const auto a =
                    classify_box(op, RegularityParams{RegularityKind::SubexpSuitable, zeta, 0.0});
                const auto b = classify_box(
                    op, RegularityParams{RegularityKind::Regular, subexp_to_regular_mass(zeta, l), 0.0});
                CHECK(a.verdict == b.verdict);
                CHECK(a.threshold == doctest::Approx(b.threshold).epsilon(1e-12));
            }
}

TEST_CASE("classify agrees with a dense-route recomputation on random instances") {
    // the full verdict pipeline re-derived through the dense inverse
    std::int64_t inst = 0;
    for (int d = 1; d <= 2; ++d)
        for (double lam : {1.0, 8.0})
            for (std::int64_t t = 0; t < 8; ++t) {
                const DisorderModel m{lam, Distribution::UniformSym, 77u + static_cast<std::uint64_t>(inst)};
                const int l = 12;
                const BoxSpec box(make_site(0, 0), l, d);
                const auto op = assemble_box(m, box, Bc::Dirichlet, t);
                const double e = -0.4 - 0.1 * static_cast<double>(t);
                const RegularityParams rp{RegularityKind::Regular, 0.4, e};
                const auto v = classify_box(op, rp);
                const double dist = spectral_dist(op, e);
                if (!(dist > singular_tolerance(op))) {
                    CHECK(v.verdict == BoxVerdict::EnergyInSpectrum);
                } else {
                    const double oracle = green_block_norm_dense(
                        op, e, belt_indices(box), subbox_indices(box, core_box(box, l / 3)), dist);
                    CHECK(v.norm_value == doctest::Approx(oracle).epsilon(1e-9));
                    CHECK(v.regular() == (oracle <= std::exp(-0.4 * l / 2.0)));
                }
                ++inst;
            }
}

TEST_CASE("d=2 singularity estimate runs end to end") {
    const DisorderModel m{8.0, Distribution::UniformSym, 0x2D};
    const auto est = estimate_singular_prob(m, 2, Bc::Dirichlet, 12,
                                            RegularityParams{RegularityKind::Regular, 0.3, 0.0}, 60,
                                            Separation{0}, 2);
    CHECK(est.trials == 60);
    CHECK(est.ci_lo <= est.p_hat);
    CHECK(est.p_hat <= est.ci_hi);
}

TEST_CASE("threshold ladder: Regular(m) verdict monotone in m") {
    for (std::int64_t t = 0; t < 20; ++t) {
        const auto op = assemble_box(kLam8, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, t);
        bool prev_regular = true;
        for (double m : {0.05, 0.2, 0.5, 1.0, 2.0}) {
            const auto v = classify_box(op, RegularityParams{RegularityKind::Regular, m, 0.0});
            const bool reg = v.regular();
            if (!prev_regular) CHECK_FALSE(reg); // once singular, larger m stays singular
            prev_regular = reg;
        }
    }
}

TEST_CASE("estimate_singular_prob") {
    SUBCASE("deterministic free operator at E=-1 with small mass: p_hat = 0") {
        const auto est = estimate_singular_prob(kFree, 1, Bc::Dirichlet, 12,
                                                RegularityParams{RegularityKind::Regular, 0.1, -1.0}, 50,
                                                Separation{0});
        CHECK(est.p_hat == 0.0);
    }
    SUBCASE("free operator at mid-spectrum energy: p_hat = 1 at large L") {
        const auto est = estimate_singular_prob(kFree, 1, Bc::Dirichlet, 48,
                                                RegularityParams{RegularityKind::Regular, 0.2, 2.0}, 20,
                                                Separation{0});
        CHECK(est.p_hat == 1.0);
    }
    SUBCASE("p_hat monotone in coupling at band center (more disorder, more regular)") {
        const RegularityParams rp{RegularityKind::Regular, 0.5, 2.0};
        const auto p2 = estimate_singular_prob(kLam2, 1, Bc::Dirichlet, 24, rp, 400, Separation{0}, 2);
        const auto p8 = estimate_singular_prob(kLam8, 1, Bc::Dirichlet, 24, rp, 400, Separation{0}, 2);
        const double sigma = std::sqrt(p2.p_hat * (1 - p2.p_hat) / 400.0 + p8.p_hat * (1 - p8.p_hat) / 400.0);
        CHECK(p8.p_hat <= p2.p_hat + 3.0 * sigma + 1e-12);
    }
    SUBCASE("zero trials rejected") {
        CHECK_THROWS_AS((void)estimate_singular_prob(kFree, 1, Bc::Dirichlet, 12,
                                                     RegularityParams{RegularityKind::Regular, 0.1, -1.0},
                                                     0, Separation{0}),
                        validation_error);
    }
}

TEST_CASE("interval certification") {
    const auto op = assemble_box(kFree, BoxSpec(make_site(0), 48, 1), Bc::Dirichlet, 0);
    const double s = 2.2;
    SUBCASE("degenerate interval reduces to classify + distance check") {
        const auto v = classify_box(op, RegularityParams{RegularityKind::Regular, 0.4, -1.0});
        const bool cert = certify_interval_regularity(op, 0.4, -1.0, -1.0, 2, s);
        const bool dist_ok = v.spectral_distance > std::pow(48.0, -s);
        CHECK(cert == (v.regular() && dist_ok));
        CHECK(cert);
    }
    SUBCASE("delta window from the resolvent perturbation step is accepted") {
        const double m0 = suitable_to_regular_mass(4.0, 48);
        const double m0p = suitable_to_regular_mass(3.0, 48);
        // single-energy check passes with margin m0 vs m0'
        REQUIRE(classify_box(op, RegularityParams{RegularityKind::Regular, m0, -1.0}).regular());
        const double delta = interval_halfwidth(m0, m0p, 48, s);
        CHECK(delta > 0);
        for (int grid_n : {2, 3, 9})
            CHECK(certify_interval_regularity(op, m0p, -1.0 - delta, -1.0 + delta, grid_n, s));
    }
    SUBCASE("certified-true implies raw checks at a 10x finer grid") {
        const double m0 = suitable_to_regular_mass(4.0, 48);
        const double m = suitable_to_regular_mass(3.0, 48);
        const double delta = interval_halfwidth(m0, m, 48, s);
        const double lo = -1.0 - delta, hi = -1.0 + delta;
        const int grid_n = 3;
        REQUIRE(certify_interval_regularity(op, m, lo, hi, grid_n, s));
        const double thr = std::exp(-m * 48.0 / 2.0);
        const auto spec = spectrum(op, false);
        for (int i = 0; i < 10 * grid_n; ++i) {
            const double e = lo + (hi - lo) * i / (10.0 * grid_n - 1);
            const double dist = spectral_dist(spec, e);
            CHECK(dist > std::pow(48.0, -s));
            CHECK(belt_core_norm(op, e, dist) <= thr);
        }
    }
    SUBCASE("conservative failure when the mass is too aggressive") {
        CHECK_FALSE(certify_interval_regularity(op, 5.0, -1.1, -0.9, 3, s));
    }
}

TEST_CASE("two-box events") {
    SUBCASE("free case at E0=-1 with small mass never fails") {
        const auto est = estimate_two_box_fail(kFree, 1, Bc::Dirichlet, 0.2, 12, -1.01, -0.99,
                                               make_site(-7), make_site(7), 3, 2.2, 30, Separation{0});
        CHECK(est.p_hat == 0.0);
    }
    SUBCASE("separation precondition") {
        CHECK_THROWS_AS((void)estimate_two_box_fail(kFree, 1, Bc::Dirichlet, 0.2, 12, -1.0, -1.0,
                                                    make_site(-6), make_site(6), 2, 2.2, 1, Separation{0}),
                        validation_error);
    }
    SUBCASE("independence: two-box fail within the product band") {
        // both-singular probability vs squared single-box probability, same certify event
        const double m = suitable_to_regular_mass(4.0, 12) / 2.0;
        const std::int64_t n = 1500;
        const double s = 2.2;
        std::int64_t one = 0;
        for (std::int64_t t = 0; t < n; ++t) {
            const auto opx = assemble_box(kLam8, BoxSpec(make_site(-7), 12, 1), Bc::Dirichlet, t);
            if (!certify_interval_regularity(opx, m, 0.0, 0.0, 2, s)) ++one;
        }
        const auto single = binomial_estimate(one, n);
        const auto two = estimate_two_box_fail(kLam8, 1, Bc::Dirichlet, m, 12, 0.0, 0.0, make_site(-7),
                                               make_site(7), 2, s, n, Separation{0}, 2);
        const double sigma = std::sqrt(two.p_hat * (1 - two.p_hat) / n);
        CHECK(two.p_hat <= single.ci_hi * single.ci_hi + 3.0 * sigma);
    }
}

TEST_CASE("schedules") {
    SUBCASE("power mode: 12 -> 36 -> 216 capped at 300") {
        ScheduleConfig cfg;
        cfg.mode = ScheduleMode::Power;
        cfg.l0 = 12;
        cfg.alpha = 1.5;
        cfg.cap = 300;
        cfg.msa_grade = false; // alpha=1.5 is inadmissible for the default exponents
        const auto s = build_schedule(cfg);
        CHECK(s.scales == std::vector<int>{12, 36, 216});
    }
    SUBCASE("geometric mode: 12 -> 132 -> 1452") {
        ScheduleConfig cfg;
        cfg.mode = ScheduleMode::Geometric;
        cfg.l0 = 12;
        cfg.y = 11;
        cfg.cap = 1500;
        cfg.msa_grade = false;
        const auto s = build_schedule(cfg);
        CHECK(s.scales == std::vector<int>{12, 132, 1452});
    }
    SUBCASE("msa-grade rejects alpha=1.5 for p=1, d=1, b=1, theta=4") {
        ScheduleConfig cfg;
        cfg.mode = ScheduleMode::Power;
        cfg.l0 = 12;
        cfg.alpha = 1.5;
        cfg.cap = 300;
        cfg.msa_grade = true;
        CHECK_THROWS_AS((void)build_schedule(cfg), validation_error);
    }
    SUBCASE("all power scales are in 6N and strictly increasing") {
        ScheduleConfig cfg;
        cfg.mode = ScheduleMode::Power;
        cfg.l0 = 12;
        cfg.alpha = 1.25;
        cfg.cap = 300;
        const auto s = build_schedule(cfg);
        CHECK(s.scales == std::vector<int>{12, 18, 36, 84, 252});
        for (std::size_t i = 0; i < s.scales.size(); ++i) {
            CHECK(s.scales[i] % 6 == 0);
            if (i) CHECK(s.scales[i] > s.scales[i - 1]);
        }
    }
}

TEST_CASE("parameter admissibility diagnostics") {
    MsaParams mp; // spec defaults with s = 2.2
    SUBCASE("defaults admissible for d=1") {
        CHECK(validate_msa_params(mp, 1, 1.25, false, true).empty());
    }
    SUBCASE("p' <= p is flagged") {
        mp.p_prime = 0.9;
        const auto d = validate_msa_params(mp, 1, 1.25, false, false);
        REQUIRE_FALSE(d.empty());
        CHECK(d[0].find("0 < p < p'") != std::string::npos);
    }
    SUBCASE("interval stage needs theta > 2p + (b+1)d") {
        mp.theta = 3.0;
        bool found = false;
        for (const auto& msg : validate_msa_params(mp, 1, -1.0, true, false))
            found = found || msg.find("theta > 2p + (b+1)d") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("s=2.5 breaks the auxiliary exponent chain at alpha=1.25") {
        mp.s = 2.5;
        bool found = false;
        for (const auto& msg : validate_msa_params(mp, 1, 1.25, false, false))
            found = found || msg.find("alpha*s") != std::string::npos;
        CHECK(found);
    }
}

TEST_CASE("fitted mass") {
    SUBCASE("norm e^{-mL/2} inverts to m") {
        // free operator: deterministic norm; fitted mass equals -2 ln(norm)/L
        const auto op = assemble_box(kFree, BoxSpec(make_site(0), 24, 1), Bc::Dirichlet, 0);
        const double norm = belt_core_norm(op, -1.0, spectral_dist(op, -1.0));
        const auto fm = fitted_mass(kFree, 1, Bc::Dirichlet, -1.0, 24, 5);
        CHECK(fm.median_mass == doctest::Approx(-2.0 * std::log(norm) / 24.0).epsilon(1e-12));
        CHECK(fm.min_mass == doctest::Approx(fm.median_mass));
    }
    SUBCASE("free-case mass approaches 2/3 of the Combes-Thomas rate from above") {
        // the belt-to-core path spans L/3 sites while the mass normalizes by L/2,
        // so -2 ln(norm)/L tends to (2/3) gamma with a positive O(1/L) correction
        const double limit = 2.0 / 3.0 * std::acosh(1.5);
        double prev_excess = 1e9;
        for (int l : {24, 48, 96, 192}) {
            const auto fm = fitted_mass(kFree, 1, Bc::Dirichlet, -1.0, l, 1);
            const double excess = fm.median_mass - limit;
            CHECK(excess > 0.0);
            CHECK(excess < prev_excess);
            prev_excess = excess;
        }
    }
    SUBCASE("strong disorder: within 30% of the Lyapunov-based rate") {
        // the belt-to-core route traverses ~L/3 sites: expected mass ~ 2 gamma/3
        const auto fm = fitted_mass(kLam8, 1, Bc::Dirichlet, 0.0, 216, 40, 2);
        const double gamma = 1.1467; // transfer-matrix value at lambda=8, E=0
        CHECK(fm.median_mass > (2.0 / 3.0) * gamma * 0.7);
        CHECK(fm.median_mass < (2.0 / 3.0) * gamma * 1.3);
    }
}

TEST_CASE("bootstrap pipeline, free control at L0=60") {
    BootstrapConfig cfg;
    cfg.l0 = 60;
    cfg.cap = 300;
    cfg.trials = 3200;
    cfg.workers = 2;
    const auto res = run_bootstrap(kFree, 1, Bc::Dirichlet, -1.0, cfg);
    CHECK_FALSE(res.halted);
    REQUIRE(res.stages.size() == 4);
    for (const auto& st : res.stages)
        for (const auto& row : st.rows) {
            CHECK(row.estimate.successes == row.estimate.trials); // zero failures everywhere
            CHECK(row.tag == Tag::Pass);
        }
    CHECK(res.stages[1].mass_ledger_ok);
    // entry threshold arithmetic: 1 - (3Y-4)^{-2d} = 1 - 1/841 at Y=11, d=1
    CHECK(res.stages[0].rows[0].threshold == doctest::Approx(1.0 - 1.0 / 841.0));
}

TEST_CASE("bootstrap halts when the starting hypothesis fails definitively") {
    BootstrapConfig cfg;
    cfg.l0 = 12;
    cfg.trials = 400;
    cfg.workers = 2;
    const auto res = run_bootstrap(kLam8, 1, Bc::Dirichlet, 0.0, cfg);
    CHECK(res.halted);
    REQUIRE(res.stages.size() == 1);
    CHECK(res.stages[0].rows[0].tag == Tag::Fail);
}
