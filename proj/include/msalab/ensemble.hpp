#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "msalab/geometry.hpp"

namespace msalab {

enum class Distribution { UniformSym, Bernoulli, Uniform01 };

std::string distribution_name(Distribution d);
Distribution distribution_from_name(const std::string& name);

/// i.i.d. site disorder: V(y) = coupling * omega_y, omega bounded per the distribution.
struct DisorderModel {
    double coupling = 1.0;
    Distribution distribution = Distribution::UniformSym;
    std::uint64_t master_seed = 1;
};

/// Single-site value omega_y for (model, trial, site); pure and deterministic.
double omega_at(const DisorderModel& model, std::int64_t trial, const Site& s, int dim);

struct EnvironmentSample {
    BoxSpec region;
    std::vector<double> values; // canonical site order of `region`
    std::int64_t trial_id = 0;

    double at_index(std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    double at_site(const Site& s) const { return values[static_cast<std::size_t>(site_index(region, s))]; }
};

EnvironmentSample sample_environment(const DisorderModel& model, const BoxSpec& region, std::int64_t trial);

enum class Bc { Dirichlet, Periodic };

/// H = -Delta + coupling*omega restricted to the box; diagonal 2d + lambda*omega_y,
/// off-diagonal -1 on nearest-neighbor pairs (plus wrap pairs under Periodic).
struct FiniteVolumeOperator {
    BoxSpec box;
    Bc bc = Bc::Dirichlet;
    double coupling = 0.0;
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd diag; // cached diagonal

    std::int64_t n() const { return matrix.rows(); }
    bool tridiagonal() const { return box.dim == 1 && bc == Bc::Dirichlet; }
};

FiniteVolumeOperator assemble(const EnvironmentSample& sample, Bc bc, const DisorderModel& model);

/// Convenience: sample + assemble for a box in one call.
FiniteVolumeOperator assemble_box(const DisorderModel& model, const BoxSpec& box, Bc bc, std::int64_t trial);

struct CovarianceReport {
    double statistic = 0.0;      // two-sample KS-style sup distance on pooled eigenvalues
    double critical_1pct = 0.0;  // c(0.01)*sqrt(2/trials); trials as effective sample size
    std::int64_t trials = 0;
};

/// Empirical check of the covariance property: spectra of the box and its shift
/// should be identically distributed. shift = 0 pairs the seeds, statistic 0.
CovarianceReport check_covariance(const DisorderModel& model, const BoxSpec& box, const Site& shift,
                                  std::int64_t trials);

} // namespace msalab
