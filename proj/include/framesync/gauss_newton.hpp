#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <vector>

#include "framesync/solution.hpp"

namespace framesync {

// Normal equations of one Gauss-Newton step on the frame update
// G_i -> G_i + E_i. Unknowns are the column-stacked E_i, frames in order,
// so the system has nd^2 rows. The block sparsity pattern follows the
// graph: block (i, j) is nonzero only on edges (either direction) or the
// diagonal.
struct GNSystem {
    int n = 0;
    int d = 0;
    Eigen::SparseMatrix<double> h;
    Eigen::VectorXd c;  // gradient of the linearized objective at E = 0
};

struct GNOptions {
    int max_iters = 5;
    double rel_tol = 1e-8;
    // Backtracking on the step length: halve beta until g decreases,
    // give up below 1/16. Off reproduces the plain undamped loop.
    bool damped = true;
};

struct GNState {
    std::vector<Eigen::MatrixXd> frames;
    std::vector<Eigen::MatrixXd> steps;
    int iterations = 0;
    std::vector<double> g_history;  // non-increasing across accepted iterations
};

namespace detail {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline void push_dense_block(std::vector<Eigen::Triplet<double>>& out, int bi, int bj,
                             const Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) != 0.0) {
                out.emplace_back(bi * m.rows() + r, bj * m.cols() + c, m(r, c));
            }
        }
    }
}

inline std::vector<Eigen::MatrixXd> frame_inverses(const std::vector<Eigen::MatrixXd>& frames) {
    std::vector<Eigen::MatrixXd> inv;
    inv.reserve(frames.size());
    for (const auto& f : frames) {
        if (condition_number(f) > 1e12) {
            throw SingularBlock("gauss_newton: singular frame iterate");
        }
        inv.push_back(f.inverse());
    }
    return inv;
}

}  // namespace detail

// Assembles H_GN and c_GN from the per-edge Kronecker block formulas.
// c_GN is the gradient of g with respect to the stacked frames at the
// current iterate, so the step solves H_GN x = -c_GN.
inline GNSystem build_gn_system(const FrameGraph& g, const EdgeTransforms& t,
                                const std::vector<Eigen::MatrixXd>& frames) {
    const int n = g.n;
    const int d = t.d;
    const int dd = d * d;
    const std::vector<Eigen::MatrixXd> inv = detail::frame_inverses(frames);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);

    GNSystem sys;
    sys.n = n;
    sys.d = d;
    sys.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * dd);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.edge_count() + n) * 4 * dd * dd);

    std::vector<Eigen::MatrixXd> diag(n, Eigen::MatrixXd::Zero(dd, dd));
    for (const auto& [i, j] : g.edges) {
        const Eigen::MatrixXd m = inv[i] * frames[j];       // G_i^{-1} G_j
        const Eigen::MatrixXd a = inv[i].transpose() * inv[i];
        diag[i] += detail::kron(m * m.transpose(), a);
        diag[j] += detail::kron(eye, a);
        detail::push_dense_block(trip, i, j, -detail::kron(m, a));
        detail::push_dense_block(trip, j, i, -detail::kron(m.transpose(), a));

        const Eigen::MatrixXd residual = t.at(i, j) - m;
        const Eigen::VectorXd vec_r =
            Eigen::Map<const Eigen::VectorXd>(residual.data(), dd);
        sys.c.segment(static_cast<Eigen::Index>(i) * dd, dd) +=
            detail::kron(m, inv[i].transpose()) * vec_r;
        sys.c.segment(static_cast<Eigen::Index>(j) * dd, dd) -=
            detail::kron(eye, inv[i].transpose()) * vec_r;
    }
    for (int i = 0; i < n; ++i) {
        detail::push_dense_block(trip, i, i, diag[i]);
    }
    sys.h.resize(static_cast<Eigen::Index>(n) * dd, static_cast<Eigen::Index>(n) * dd);
    sys.h.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

namespace detail {

// Minimum-norm solution of h x = -c. Direct below 4000 unknowns (the
// system can be semidefinite: the global left multiplier is a flat
// direction of g), conjugate gradients with diagonal preconditioning
// above; CG started at zero stays in the range of h, which is where the
// minimum-norm solution lives when c does.
inline Eigen::VectorXd solve_normal_min_norm(const Eigen::SparseMatrix<double>& h,
                                             const Eigen::VectorXd& c) {
    const Eigen::Index dim = c.size();
    Eigen::VectorXd x;
    if (dim <= 4000) {
        const Eigen::MatrixXd dense_h(h);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dense_h);
        x = cod.solve(-c);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
            cg(h);
        cg.setTolerance(1e-12);
        cg.setMaxIterations(20 * dim);
        x = cg.solve(-c);
    }
    const double cnorm = c.norm();
    if (cnorm > 0.0 && (h * x + c).norm() > 1e-10 * cnorm) {
        throw SolverError("gauss_newton: linear solve did not reach tolerance");
    }
    return x;
}

}  // namespace detail

// Solves H_GN x = -c_GN and unpacks the steps.
inline std::vector<Eigen::MatrixXd> gn_step(const GNSystem& sys) {
    const Eigen::VectorXd x = detail::solve_normal_min_norm(sys.h, sys.c);
    const int dd = sys.d * sys.d;
    std::vector<Eigen::MatrixXd> steps(sys.n);
    for (int i = 0; i < sys.n; ++i) {
        steps[i] = Eigen::Map<const Eigen::MatrixXd>(
            x.data() + static_cast<Eigen::Index>(i) * dd, sys.d, sys.d);
    }
    return steps;
}

// Same normal equations assembled from explicit per-edge Jacobians, with
// an element-wise weight on the residual blocks (sqrt scale per entry).
// With unit weights this agrees with build_gn_system block for block; the
// affine pipeline uses it when the linear part is weighted against the
// translations.
inline GNSystem build_gn_system_weighted(const FrameGraph& g, const EdgeTransforms& t,
                                         const std::vector<Eigen::MatrixXd>& frames,
                                         const Eigen::MatrixXd& sqrt_weights) {
    const int n = g.n;
    const int d = t.d;
    const int dd = d * d;
    const std::vector<Eigen::MatrixXd> inv = detail::frame_inverses(frames);
    const Eigen::VectorXd w =
        Eigen::Map<const Eigen::VectorXd>(sqrt_weights.data(), dd);

    GNSystem sys;
    sys.n = n;
    sys.d = d;
    sys.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * dd);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.edge_count() + n) * 4 * dd * dd);

    std::vector<Eigen::MatrixXd> diag(n, Eigen::MatrixXd::Zero(dd, dd));
    for (const auto& [i, j] : g.edges) {
        const Eigen::MatrixXd m = inv[i] * frames[j];
        const Eigen::MatrixXd ji = w.asDiagonal() * detail::kron(m.transpose(), inv[i]);
        const Eigen::MatrixXd jj = w.asDiagonal() * detail::kron(
                                       Eigen::MatrixXd::Identity(d, d), inv[i]);
        diag[i] += ji.transpose() * ji;
        diag[j] += jj.transpose() * jj;
        detail::push_dense_block(trip, i, j, Eigen::MatrixXd(-ji.transpose() * jj));
        detail::push_dense_block(trip, j, i, Eigen::MatrixXd(-jj.transpose() * ji));

        const Eigen::MatrixXd residual = t.at(i, j) - m;
        const Eigen::VectorXd wr =
            w.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(residual.data(), dd));
        sys.c.segment(static_cast<Eigen::Index>(i) * dd, dd) += ji.transpose() * wr;
        sys.c.segment(static_cast<Eigen::Index>(j) * dd, dd) -= jj.transpose() * wr;
    }
    for (int i = 0; i < n; ++i) {
        detail::push_dense_block(trip, i, i, diag[i]);
    }
    sys.h.resize(static_cast<Eigen::Index>(n) * dd, static_cast<Eigen::Index>(n) * dd);
    sys.h.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

// Gauss-Newton refinement loop, initialized from a direct solution
// (normally the H-method). Terminates when the relative g-improvement
// drops below rel_tol or after max_iters iterations.
inline std::pair<FrameSolution, GNState> run_gn(const FrameGraph& g, const EdgeTransforms& t,
                                                const FrameSolution& init,
                                                const GNOptions& opts = {}) {
    GNState state;
    state.frames = init.frames;
    state.steps.assign(init.n(), Eigen::MatrixXd::Zero(init.d, init.d));
    double g_cur = g_of_frames(g, t, state.frames);
    state.g_history.push_back(g_cur);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const GNSystem sys = build_gn_system(g, t, state.frames);
        std::vector<Eigen::MatrixXd> steps = gn_step(sys);

        double beta = 1.0;
        std::vector<Eigen::MatrixXd> candidate(state.frames.size());
        double g_next = 0.0;
        bool accepted = false;
        while (true) {
            for (std::size_t i = 0; i < candidate.size(); ++i) {
                candidate[i] = state.frames[i] + beta * steps[i];
            }
            g_next = g_of_frames(g, t, candidate);
            if (!opts.damped || g_next <= g_cur) {
                accepted = true;
                break;
            }
            beta *= 0.5;
            if (beta < 1.0 / 16.0) break;
        }
        if (!accepted) break;

        for (auto& s : steps) s *= beta;
        state.steps = std::move(steps);
        state.frames = std::move(candidate);
        state.g_history.push_back(g_next);
        ++state.iterations;

        const double improvement = g_cur - g_next;
        g_cur = g_next;
        if (improvement < opts.rel_tol * std::max(g_cur, 1e-30)) break;
    }

    FrameSolution out;
    out.d = init.d;
    out.method = "gn";
    out.frames = state.frames;
    return {out, state};
}

}  // namespace framesync
