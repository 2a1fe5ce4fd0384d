#include <doctest.h>

#include <cmath>
#include <complex>

#include "msalab/ensemble.hpp"
#include "msalab/rng.hpp"
#include "msalab/spectral.hpp"

using namespace msalab;

namespace {

const DisorderModel kFree{0.0, Distribution::UniformSym, 1};
const DisorderModel kLam1{1.0, Distribution::UniformSym, 0xBEEF};

std::vector<std::int64_t> all_indices(const FiniteVolumeOperator& op) {
    std::vector<std::int64_t> v(static_cast<std::size_t>(op.n()));
    for (std::int64_t i = 0; i < op.n(); ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

} // namespace

TEST_CASE("spectrum: closed forms, orthonormality, reconstruction") {
    SUBCASE("free d=1 L=4") {
        const auto spec = spectrum(assemble_box(kFree, BoxSpec(make_site(0), 4, 1), Bc::Dirichlet, 0));
        for (int k = 1; k <= 3; ++k)
            CHECK(spec.eigenvalues[k - 1] ==
                  doctest::Approx(2.0 - 2.0 * std::cos(k * M_PI / 4.0)).epsilon(1e-12));
    }
    SUBCASE("1x1 [3.5]") {
        DisorderModel m{3.0, Distribution::UniformSym, 1};
        EnvironmentSample s;
        s.region = BoxSpec(make_site(0), 2, 1);
        s.values = {0.5};
        const auto spec = spectrum(assemble(s, Bc::Dirichlet, m));
        CHECK(spec.eigenvalues[0] == doctest::Approx(3.5));
    }
    SUBCASE("random ~50x50: reconstruction, orthonormality, residual") {
        const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 52, 1), Bc::Dirichlet, 7);
        const auto spec = spectrum(op);
        const Eigen::MatrixXd h(op.matrix);
        const Eigen::MatrixXd rebuilt =
            spec.eigenvectors * spec.eigenvalues.asDiagonal() * spec.eigenvectors.transpose();
        CHECK((h - rebuilt).cwiseAbs().maxCoeff() <= 1e-9);
        const Eigen::MatrixXd gram = spec.eigenvectors.transpose() * spec.eigenvectors;
        CHECK((gram - Eigen::MatrixXd::Identity(op.n(), op.n())).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(spec.residual_bound <= 1e-8 * op_norm_bound(op));
        for (Eigen::Index j = 1; j < spec.eigenvalues.size(); ++j)
            CHECK(spec.eigenvalues[j] >= spec.eigenvalues[j - 1]);
    }
    SUBCASE("capacity error above the dense cap") {
        const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 0);
        CHECK_THROWS_AS((void)spectrum(op, false, 5), capacity_error);
    }
}

TEST_CASE("spectral_dist") {
    DisorderModel m{3.0, Distribution::UniformSym, 1};
    EnvironmentSample s;
    s.region = BoxSpec(make_site(0), 2, 1);
    s.values = {0.5};
    const auto op = assemble(s, Bc::Dirichlet, m);
    CHECK(spectral_dist(op, 3.5) == doctest::Approx(0.0));
    CHECK(spectral_dist(op, 2.0) == doctest::Approx(1.5));
    const auto free4 = assemble_box(kFree, BoxSpec(make_site(0), 4, 1), Bc::Dirichlet, 0);
    CHECK(spectral_dist(free4, 0.0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("green block norms") {
    SUBCASE("full block equals 1/dist") {
        const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 11);
        const double dist = spectral_dist(op, -1.0);
        const double full = green_block_norm(op, -1.0, all_indices(op), all_indices(op), dist);
        CHECK(full == doctest::Approx(1.0 / dist).epsilon(1e-9));
    }
    SUBCASE("free d=1 L=12 at E=-1: belt-core <= full <= 1") {
        const auto op = assemble_box(kFree, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 0);
        const double dist = spectral_dist(op, -1.0);
        const double bc = belt_core_norm(op, -1.0, dist);
        const double full = green_block_norm(op, -1.0, all_indices(op), all_indices(op), dist);
        CHECK(bc <= full);
        CHECK(full <= 1.0);
    }
    SUBCASE("sparse path equals dense oracle over random instances") {
        int inst = 0;
        for (int d = 1; d <= 2; ++d)
            for (double lam : {0.0, 1.0, 8.0})
                for (int l : {6, 12}) {
                    DisorderModel m{lam, Distribution::UniformSym, 40 + static_cast<std::uint64_t>(inst)};
                    const BoxSpec box(make_site(0, 0), l, d);
                    const auto op = assemble_box(m, box, Bc::Dirichlet, inst);
                    const double e = -lam - 1.1 - 0.03 * inst;
                    const double dist = spectral_dist(op, e);
                    const auto rows = belt_indices(box);
                    const auto cols = subbox_indices(box, core_box(box, l / 3));
                    const double a = green_block_norm(op, e, rows, cols, dist);
                    const double b = green_block_norm_dense(op, e, rows, cols, dist);
                    CHECK(std::abs(a - b) <= 1e-9 * b);
                    ++inst;
                }
    }
    SUBCASE("block norm monotone under submatrix; singular energy rejected") {
        const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 12, 1), Bc::Dirichlet, 2);
        const auto spec = spectrum(op, false);
        const double e = spec.eigenvalues[3];
        CHECK_THROWS_AS((void)belt_core_norm(op, e, spectral_dist(spec, e)), singular_energy_error);
        for (std::int64_t t = 0; t < 10; ++t) {
            const double et = -1.0 - 0.2 * static_cast<double>(t);
            const double dist = spectral_dist(spec, et);
            CHECK(belt_core_norm(op, et, dist) <=
                  green_block_norm(op, et, all_indices(op), all_indices(op), dist) + 1e-15);
        }
    }
    SUBCASE("Combes-Thomas qualitative decay in L (free, E=-1)") {
        double prev = 1e9;
        for (int l : {12, 24, 48}) {
            const auto op = assemble_box(kFree, BoxSpec(make_site(0), l, 1), Bc::Dirichlet, 0);
            const double v = belt_core_norm(op, -1.0, spectral_dist(op, -1.0));
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("resolvent identity on random instances") {
    // R(E1) - R(E2) = (E1 - E2) R(E1) R(E2), checked on ~30x30 dense resolvents
    for (int t = 0; t < 5; ++t) {
        const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 32, 1), Bc::Dirichlet, 100 + t);
        const double e1 = -1.3 - 0.1 * t, e2 = -2.2 + 0.05 * t;
        Eigen::MatrixXd h(op.matrix);
        const Eigen::MatrixXd r1 = (h - e1 * Eigen::MatrixXd::Identity(op.n(), op.n())).inverse();
        const Eigen::MatrixXd r2 = (h - e2 * Eigen::MatrixXd::Identity(op.n(), op.n())).inverse();
        const Eigen::MatrixXd lhs = r1 - r2 - (e1 - e2) * r1 * r2;
        CHECK(lhs.cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("evolve") {
    const auto op = assemble_box(kLam1, BoxSpec(make_site(0), 24, 1), Bc::Dirichlet, 5);
    const auto spec = spectrum(op);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(op.n());
    psi[op.n() / 2] = std::complex<double>(0.8, 0.6);
    SUBCASE("t=0 is the identity") {
        CHECK((evolve(spec, psi, 0.0) - psi).norm() <= 1e-12);
    }
    SUBCASE("unitary for random times") {
        for (double t : {0.3, 2.7, 31.4, 999.0})
            CHECK(evolve(spec, psi, t).norm() == doctest::Approx(psi.norm()).epsilon(1e-9));
    }
    SUBCASE("eigenvector picks up a phase") {
        const Eigen::VectorXcd v = spec.eigenvectors.col(3).cast<std::complex<double>>();
        const double t = 1.7;
        const Eigen::VectorXcd want =
            std::exp(std::complex<double>(0, -spec.eigenvalues[3] * t)) * v;
        CHECK((evolve(spec, v, t) - want).norm() <= 1e-9);
    }
}
