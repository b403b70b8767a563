#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <algorithm>

#include "framesync/block_matrix.hpp"
#include "framesync/errors.hpp"
#include "framesync/rng.hpp"

namespace framesync {

// Matrices up to this dimension are factorized densely; above it the
// iterative sparse paths below take over.
inline constexpr Eigen::Index kDenseSpectralLimit = 2000;

namespace detail {

inline Eigen::VectorXd deterministic_unit_vector(Eigen::Index dim) {
    Rng rng(0x5eedull);
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.gaussian();
    return v.normalized();
}

// Largest eigenvalue of the sparse symmetric PSD matrix b, by power
// iteration with Rayleigh quotient convergence test.
inline double largest_eigenvalue_psd(const Eigen::SparseMatrix<double>& b, double tol,
                                     int max_iters) {
    Eigen::VectorXd v = deterministic_unit_vector(b.rows());
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = b * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
            return next;
        }
        lambda = next;
    }
    throw SolverError("power iteration did not converge");
}

}  // namespace detail

// Estimate of the spectral radius via ||M||_2 (power iteration on M^T M).
// Exact for symmetric M; a safe upper bound on rho(M) otherwise, which is
// what the step-size rules of the distributed protocols need.
inline double spectral_radius(const BlockMatrix& m, double tol = 1e-6,
                              int max_iters = 100000) {
    const Eigen::SparseMatrix<double> mt = m.sparse().transpose();
    const Eigen::SparseMatrix<double> b = mt * m.sparse();
    // relative tol on lambda = sigma^2 gives ~tol/2 on sigma
    return std::sqrt(detail::largest_eigenvalue_psd(b, tol, max_iters));
}

namespace detail {

// Orthonormal basis of the invariant subspace of M^T M belonging to the k
// smallest eigenvalues, by shifted block inverse iteration. Deterministic
// start, so repeated calls agree bit for bit.
inline Eigen::MatrixXd smallest_subspace_iterative(const Eigen::SparseMatrix<double>& m,
                                                   int k, double tol = 1e-12,
                                                   int max_iters = 500) {
    const Eigen::Index dim = m.rows();
    const Eigen::SparseMatrix<double> mt = m.transpose();
    Eigen::SparseMatrix<double> b = mt * m;
    const double top = largest_eigenvalue_psd(b, 1e-8, 100000);
    const double shift = std::max(1e-10 * top, 1e-300);
    Eigen::SparseMatrix<double> ident(dim, dim);
    ident.setIdentity();
    b += shift * ident;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(b);
    if (ldlt.info() != Eigen::Success) {
        throw SolverError("LDLT factorization failed in subspace extraction");
    }

    Rng rng(0x5eedull);
    Eigen::MatrixXd v(dim, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) v(i, j) = rng.gaussian();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    v = qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);

    for (int it = 0; it < max_iters; ++it) {
        Eigen::MatrixXd x = ldlt.solve(v);
        Eigen::HouseholderQR<Eigen::MatrixXd> step(x);
        v = step.householderQ() * Eigen::MatrixXd::Identity(dim, k);
        const Eigen::MatrixXd bv = mt * (m * v);
        const Eigen::MatrixXd proj = v.transpose() * bv;
        const double residual = (bv - v * proj).norm();
        if (residual <= tol * std::max(top, 1e-300) * std::sqrt(static_cast<double>(k))) {
            // order columns by ascending Rayleigh quotient
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(proj);
            return v * small.eigenvectors();
        }
    }
    throw SolverError("block inverse iteration did not converge");
}

}  // namespace detail

// V1: orthonormal nd x d matrix spanning the right-singular subspace of
// the d smallest singular values; minimizes ||M V||_F^2 over V^T V = I.
// Ties at the d-th singular value are broken by the factorization's
// native ordering -- downstream results are left-equivalence classes, so
// any orthonormal basis of the invariant subspace is acceptable.
inline Eigen::MatrixXd smallest_singular_subspace(const BlockMatrix& m, int d) {
    const Eigen::Index dim = m.dim();
    if (dim <= kDenseSpectralLimit) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m.dense(), Eigen::ComputeFullV);
        return svd.matrixV().rightCols(d);
    }
    return detail::smallest_subspace_iterative(m.sparse(), d);
}

// Number of singular values below tol * sigma_max. Dense exact count up to
// the dense limit; above it, counted among the 4d+4 smallest extracted
// iteratively (the synchronization matrices here have kernels of dimension
// at most d in all non-degenerate configurations).
inline int kernel_dimension(const BlockMatrix& m, double tol = 1e-8) {
    const Eigen::Index dim = m.dim();
    if (dim <= kDenseSpectralLimit) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m.dense());
        const Eigen::VectorXd sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv(0) : 0.0;
        if (smax == 0.0) return static_cast<int>(dim);
        return static_cast<int>((sv.array() < tol * smax).count());
    }
    const double smax = spectral_radius(m);
    if (smax == 0.0) return static_cast<int>(dim);
    const int k = static_cast<int>(std::min<Eigen::Index>(4 * m.d() + 4, dim));
    const Eigen::MatrixXd v = detail::smallest_subspace_iterative(m.sparse(), k);
    int count = 0;
    for (int j = 0; j < k; ++j) {
        if ((m.sparse() * v.col(j)).norm() < tol * smax) ++count;
    }
    return count;
}

}  // namespace framesync
