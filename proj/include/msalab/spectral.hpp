#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "msalab/ensemble.hpp"

namespace msalab {

struct SpectralData {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // orthonormal columns; empty when not requested
    double residual_bound = 0.0;  // max_j ||H v_j - lambda_j v_j||_2 when vectors kept

    bool has_vectors() const { return eigenvectors.size() > 0; }
};

/// Gershgorin bound for ||H||.
double op_norm_bound(const FiniteVolumeOperator& op);

/// Dense (or tridiagonal, in d=1 Dirichlet) symmetric eigensolve.
SpectralData spectrum(const FiniteVolumeOperator& op, bool with_vectors = true,
                      std::int64_t dense_cap = 20000);

double spectral_dist(const SpectralData& spec, double energy);
double spectral_dist(const FiniteVolumeOperator& op, double energy);

/// Energies closer to the spectrum than this are treated as in-spectrum.
double singular_tolerance(const FiniteVolumeOperator& op);

/// A resolvent block request: row/col index sets over sites(box), energy off sigma(H).
struct GreenBlockRequest {
    const FiniteVolumeOperator* op = nullptr;
    double energy = 0.0;
    std::vector<std::int64_t> row_set;
    std::vector<std::int64_t> col_set;
};

/// Largest singular value of the rows x cols block of (H - E)^{-1}, by sparse-LU
/// column solves. `dist` is the caller's spectral distance at E (used for the
/// singular-energy guard); pass spectral_dist(op, E).
double green_block_norm(const FiniteVolumeOperator& op, double energy,
                        const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols,
                        double dist);

double green_block_norm(const GreenBlockRequest& req);

/// Same block norm through the dense-inverse route; the internal oracle for the solve path.
double green_block_norm_dense(const FiniteVolumeOperator& op, double energy,
                              const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols,
                              double dist);

/// Belt-to-core decay norm: belt rows, side/3 concentric core columns. Requires side in 6N.
double belt_core_norm(const FiniteVolumeOperator& op, double energy, double dist);

/// exp(-iHt) psi through the eigenpairs.
Eigen::VectorXcd evolve(const SpectralData& spec, const Eigen::VectorXcd& psi, double t);

} // namespace msalab
