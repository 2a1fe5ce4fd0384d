#include "msalab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "msalab/errors.hpp"

namespace msalab {

double op_norm_bound(const FiniteVolumeOperator& op) {
    double m = 0.0;
    for (std::int64_t i = 0; i < op.n(); ++i) m = std::max(m, std::abs(op.diag[i]) + 2.0 * op.box.dim);
    return m;
}

SpectralData spectrum(const FiniteVolumeOperator& op, bool with_vectors, std::int64_t dense_cap) {
    const auto n = op.n();
    if (n > dense_cap)
        throw capacity_error("spectrum: dimension " + std::to_string(n) + " exceeds dense cap " +
                             std::to_string(dense_cap));
    SpectralData out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    const auto opts = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    if (op.tridiagonal() && n > 1) {
        Eigen::VectorXd sub = Eigen::VectorXd::Constant(n - 1, -1.0);
        es.computeFromTridiagonal(op.diag, sub, opts);
    } else {
        es.compute(Eigen::MatrixXd(op.matrix), opts);
    }
    if (es.info() != Eigen::Success) throw numerical_error("spectrum: eigensolver failed to converge");
    out.eigenvalues = es.eigenvalues();
    if (with_vectors) {
        out.eigenvectors = es.eigenvectors();
        Eigen::MatrixXd r = op.matrix * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
        out.residual_bound = r.colwise().norm().maxCoeff();
    }
    return out;
}

double spectral_dist(const SpectralData& spec, double energy) {
    const auto& ev = spec.eigenvalues;
    const auto n = ev.size();
    const double* b = ev.data();
    const double* e = b + n;
    const double* it = std::lower_bound(b, e, energy);
    double d = std::numeric_limits<double>::infinity();
    if (it != e) d = std::min(d, std::abs(*it - energy));
    if (it != b) d = std::min(d, std::abs(*(it - 1) - energy));
    return d;
}

double spectral_dist(const FiniteVolumeOperator& op, double energy) {
    return spectral_dist(spectrum(op, false), energy);
}

double singular_tolerance(const FiniteVolumeOperator& op) {
    return 1e-12 * std::max(1.0, op_norm_bound(op));
}

namespace {

double block_top_singular_value(const Eigen::MatrixXd& b) {
    if (b.rows() == 1 || b.cols() == 1) return b.norm();
    if (std::min(b.rows(), b.cols()) <= 32)
        return Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues()(0);
    return Eigen::BDCSVD<Eigen::MatrixXd>(b).singularValues()(0);
}

void check_not_singular(const FiniteVolumeOperator& op, double energy, double dist) {
    if (!(dist > singular_tolerance(op)))
        throw singular_energy_error("green block: E=" + std::to_string(energy) +
                                    " is within tolerance of the spectrum (dist=" + std::to_string(dist) + ")");
}

} // namespace

double green_block_norm(const FiniteVolumeOperator& op, double energy,
                        const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols,
                        double dist) {
    check_not_singular(op, energy, dist);
    const auto n = op.n();
    Eigen::SparseMatrix<double> a = op.matrix;
    for (std::int64_t i = 0; i < n; ++i) a.coeffRef(i, i) -= energy;
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw numerical_error("green block: sparse LU factorization failed");

    Eigen::MatrixXd block(static_cast<std::int64_t>(rows.size()), static_cast<std::int64_t>(cols.size()));
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        e[cols[k]] = 1.0;
        Eigen::VectorXd u = lu.solve(e);
        if (lu.info() != Eigen::Success) throw numerical_error("green block: sparse solve failed");
        for (std::size_t r = 0; r < rows.size(); ++r) block(static_cast<std::int64_t>(r), static_cast<std::int64_t>(k)) = u[rows[r]];
        e[cols[k]] = 0.0;
    }
    return block_top_singular_value(block);
}

double green_block_norm(const GreenBlockRequest& req) {
    if (!req.op) throw validation_error("green_block_norm: request carries no operator");
    for (auto i : req.row_set)
        if (i < 0 || i >= req.op->n()) throw validation_error("green_block_norm: row index out of range");
    for (auto i : req.col_set)
        if (i < 0 || i >= req.op->n()) throw validation_error("green_block_norm: col index out of range");
    return green_block_norm(*req.op, req.energy, req.row_set, req.col_set,
                            spectral_dist(*req.op, req.energy));
}

double green_block_norm_dense(const FiniteVolumeOperator& op, double energy,
                              const std::vector<std::int64_t>& rows, const std::vector<std::int64_t>& cols,
                              double dist) {
    check_not_singular(op, energy, dist);
    const auto n = op.n();
    if (n > 4000) throw capacity_error("green_block_norm_dense: dimension over the dense oracle cap");
    Eigen::MatrixXd a = Eigen::MatrixXd(op.matrix);
    a.diagonal().array() -= energy;
    Eigen::MatrixXd g = a.inverse();
    Eigen::MatrixXd block(static_cast<std::int64_t>(rows.size()), static_cast<std::int64_t>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < cols.size(); ++k)
            block(static_cast<std::int64_t>(r), static_cast<std::int64_t>(k)) = g(rows[r], cols[k]);
    return block_top_singular_value(block);
}

double belt_core_norm(const FiniteVolumeOperator& op, double energy, double dist) {
    if (op.box.side % 6 != 0) throw validation_error("belt_core_norm: box side must be in 6N");
    const auto rows = belt_indices(op.box);
    const auto cols = subbox_indices(op.box, core_box(op.box, op.box.side / 3));
    return green_block_norm(op, energy, rows, cols, dist);
}

Eigen::VectorXcd evolve(const SpectralData& spec, const Eigen::VectorXcd& psi, double t) {
    if (!spec.has_vectors()) throw validation_error("evolve: spectral data carries no eigenvectors");
    const auto& v = spec.eigenvectors;
    Eigen::VectorXcd coef = v.transpose() * psi;
    for (Eigen::Index j = 0; j < coef.size(); ++j)
        coef[j] *= std::exp(std::complex<double>(0.0, -spec.eigenvalues[j] * t));
    return v * coef;
}

} // namespace msalab
