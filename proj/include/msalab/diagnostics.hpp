#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msalab/ensemble.hpp"
#include "msalab/msa.hpp"
#include "msalab/spectral.hpp"
#include "msalab/stats.hpp"

namespace msalab {

/// Eigenvector amplitudes below this (relative to ||psi||=1) are eigensolver noise;
/// decay fits and ratio denominators ignore them.
inline constexpr double kAmplitudeFloor = 1e-12;
inline constexpr double kProfileFloor = 1e-13;

// ---- (SLI) ----

/// Simon-Lieb ratio LHS / (||Gamma_in R_in chi_cell|| * ||Gamma_out R_out Gamma_in||)
/// for cell < inner < outer (thick inclusion). Throws singular_energy_error when E is
/// within tolerance of either spectrum.
double sli_ratio(const FiniteVolumeOperator& outer_op, const FiniteVolumeOperator& inner_op,
                 const BoxSpec& cell, double energy);

struct SliScan {
    double gamma_max = 0.0;
    std::vector<double> ratios;
    std::int64_t skipped = 0; // near-spectral trials
};

/// Empirical gamma_I over concentric (outer, inner, cell) instances.
SliScan sli_scan(const DisorderModel& model, int dim, Bc bc, int outer_side, int inner_side,
                 int cell_side, double energy, std::int64_t trials, int workers = 1);

// ---- (EDI) ----

struct EdiRatio {
    double spec_belt = 0.0;  // ||chi_x psi|| / (||Gamma R chi_x|| * ||Gamma psi||), width-1 belt
    double thick_belt = 0.0; // same with the width-L/3 thick belt under psi
    bool valid = false;      // amplitudes above the noise floor and E off sigma(probe)
};

/// Eigenfunction-decay ratio for one probe box inside a big box; psi is an eigenvector
/// of the big operator with eigenvalue `energy`, normalized.
EdiRatio edi_ratio(const Eigen::VectorXd& psi, double energy, const BoxSpec& big_box,
                   const FiniteVolumeOperator& probe_op);

struct EdiScan {
    double gamma_max_spec = 0.0;
    double gamma_max_thick = 0.0;
    std::int64_t probes = 0;
    std::vector<double> ratios_thick;
};

/// Probes of side probe_side tile the big box; per trial the eigenpair nearest
/// e_target is used.
EdiScan edi_scan(const DisorderModel& model, int dim, Bc bc, int big_side, int probe_side,
                 double e_target, std::int64_t trials, int workers = 1);

// ---- (W) ----

struct WegnerCurve {
    double energy = 0.0;
    std::vector<double> etas;
    std::vector<int> scales;
    std::vector<std::vector<MonteCarloEstimate>> p; // [scale][eta]
    double eta_slope = 0.0;   // joint log-log fit exponent in eta
    double l_exponent = 0.0;  // joint log-log fit exponent in L
};

WegnerCurve wegner_scan(const DisorderModel& model, int dim, Bc bc, double energy,
                        const std::vector<double>& etas, const std::vector<int>& scales,
                        std::int64_t trials, int workers = 1);

// ---- (NE) ----

struct NeRow {
    int scale = 0;
    double mean_count = 0.0;
    double per_volume = 0.0; // mean_count / L^d
    double std_error = 0.0;
};

struct NeTable {
    double e_lo = 0.0, e_hi = 0.0;
    std::vector<NeRow> rows;
    double spread = 0.0; // (max-min)/min of mean_count/L across scales
};

NeTable ne_scan(const DisorderModel& model, int dim, Bc bc, double e_lo, double e_hi,
                const std::vector<int>& scales, std::int64_t trials, int workers = 1);

// ---- eigenvalue-distance events ----

MonteCarloEstimate eigenvalue_distance_event(const DisorderModel& model, int dim, Bc bc,
                                             const BoxSpec& box_a, const BoxSpec& box_b, double eta,
                                             const Separation& sep, std::int64_t trials,
                                             int workers = 1);

// ---- eigenfunction decay ----

struct DecayProfile {
    Site center{};
    double eigenvalue = 0.0;
    std::vector<int> radii;
    std::vector<double> log_norm; // ln of the shell L2 norm
    double fitted_rate = 0.0;     // from least squares on the tail half of the valid radii
    double r2 = 0.0;
};

/// Build the radial profile of |v| around its max-modulus site and fit the tail half.
/// Radii whose shell norm falls under the profile floor are dropped.
DecayProfile profile_from_vector(const BoxSpec& box, const Eigen::VectorXd& v, double eigenvalue);

struct DecaySummary {
    std::vector<DecayProfile> profiles;
    double median_rate = 0.0;
};

DecaySummary eigenfunction_decay(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                                 double e_lo, double e_hi, std::int64_t trials, int workers = 1);

// ---- dynamics ----

struct MomentTrace {
    std::vector<double> times;
    std::vector<double> moment;        // M_n(t)
    std::vector<double> cesaro;        // running mean over the grid
    double max_value = 0.0;
    double late_early_ratio = 0.0;     // max over grid / value at the first grid point
};

/// M_n(t) = || <x>^{n/2} E(I) e^{-iHt} psi0 ||^2 with <x> about the box center.
MomentTrace dynamical_moment(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                             double e_lo, double e_hi, int n, const Site& psi0_site,
                             const std::vector<double>& t_grid, std::int64_t trial = 0);

// ---- eigenfunction correlator ----

struct CorrelatorFit {
    std::vector<int> radii;
    std::vector<double> q;     // trial-averaged Q(r), r >= 1
    double q0 = 0.0;           // Q at the center: ||E(I) chi_0||^2 <= 1 per trial
    double best_zeta = 0.0;
    double rate = 0.0;
    double r2 = 0.0;
};

/// Q(x, 0; I) = sum_{lambda_j in I} ||chi_x P_j chi_0||_2 around the box center,
/// fitted as ln Q ~ -rate * r^zeta over a zeta grid.
CorrelatorFit correlator_decay(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                               double e_lo, double e_hi, std::int64_t trials, int workers = 1);

// ---- 1D transfer-matrix oracle ----

struct LyapunovEstimate {
    double gamma = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0; // batch-means 95% interval
    std::int64_t steps = 0;
};

/// Top Lyapunov exponent of the products of [[E-2-lambda*omega_k, -1],[1,0]].
LyapunovEstimate lyapunov_1d(const DisorderModel& model, double energy, std::int64_t steps,
                             int batches = 32, std::int64_t trial = 0);

} // namespace msalab
