#pragma once

#include <Eigen/Dense>
#include <vector>

#include "framesync/gauss_newton.hpp"
#include "framesync/sync_direct.hpp"

namespace framesync {

// Affine transform x -> Q x + t, embedded as the (d+1) x (d+1) homogeneous
// matrix [[Q, t], [0, 1]]. Euclidean transforms are the special case of
// orthogonal Q. Spatial dimension d, homogeneous dimension D = d + 1.
struct AffineTransform {
    Eigen::MatrixXd q;
    Eigen::VectorXd t;

    int d() const { return static_cast<int>(t.size()); }

    Eigen::MatrixXd homogeneous() const {
        const int dim = d();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
        m.topLeftCorner(dim, dim) = q;
        m.topRightCorner(dim, 1) = t;
        m(dim, dim) = 1.0;
        return m;
    }

    AffineTransform inverse() const {
        const Eigen::MatrixXd qi = q.inverse();
        return {qi, -qi * t};
    }

    bool is_euclidean(double tol = 1e-10) const {
        const int dim = d();
        return (q.transpose() * q - Eigen::MatrixXd::Identity(dim, dim)).norm() <= tol;
    }
};

// Splits a homogeneous matrix; the last row must be exactly (0, ..., 0, 1).
inline AffineTransform split_homogeneous(const Eigen::MatrixXd& m) {
    const int dim = static_cast<int>(m.rows()) - 1;
    if (m.rows() != m.cols() || dim < 1) {
        throw ConfigError("split_homogeneous: matrix is not homogeneous");
    }
    for (int c = 0; c < dim; ++c) {
        if (m(dim, c) != 0.0) {
            throw ConfigError("split_homogeneous: malformed last row");
        }
    }
    if (m(dim, dim) != 1.0) {
        throw ConfigError("split_homogeneous: malformed last row");
    }
    return {m.topLeftCorner(dim, dim), m.topRightCorner(dim, 1)};
}

// Translation synchronization (P8): given the linear parts, the optimal
// translations solve the singular system H_Aff t = -c_Aff. The kernel is
// the common shift of all t_i; the minimum-norm representative (mean-zero
// in the kernel direction) is returned.
inline std::vector<Eigen::VectorXd> solve_translations(
    const FrameGraph& g, const std::vector<Eigen::MatrixXd>& rotations,
    const std::map<Edge, Eigen::VectorXd>& t_obs) {
    const int n = g.n;
    const int d = rotations.empty() ? 0 : static_cast<int>(rotations[0].rows());
    std::vector<Eigen::MatrixXd> qi_inv(n);
    for (int i = 0; i < n; ++i) qi_inv[i] = rotations[i].inverse();

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * d, n * d);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n * d);
    for (const auto& [i, j] : g.edges) {
        const Eigen::MatrixXd a = qi_inv[i].transpose() * qi_inv[i];
        h.block(i * d, i * d, d, d) += a;
        h.block(j * d, j * d, d, d) += a;
        h.block(i * d, j * d, d, d) -= a;
        h.block(j * d, i * d, d, d) -= a;
        const Eigen::VectorXd b = qi_inv[i].transpose() * t_obs.at({i, j});
        c.segment(i * d, d) += b;
        c.segment(j * d, d) -= b;
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(h);
    const Eigen::VectorXd t = cod.solve(-c);
    // c is orthogonal to the kernel by construction; a large residual
    // would mean the system was assembled inconsistently
    if (c.norm() > 0.0 && (h * t + c).norm() > 1e-8 * c.norm()) {
        throw SolverError("solve_translations: inconsistent normal equations");
    }
    std::vector<Eigen::VectorXd> out(n);
    for (int i = 0; i < n; ++i) out[i] = t.segment(i * d, d);
    return out;
}

// Maps reduced step variables to the full vec-space of homogeneous D x D
// frame updates so that every reconstructed E_i has a zero last row: the
// update G_i + E_i then stays affine bit for bit.
struct AffineMaskSelector {
    int n = 0;
    int hom_dim = 0;           // D
    std::vector<int> kept;     // kept vec-indices within one frame block

    int full_per_frame() const { return hom_dim * hom_dim; }
    int reduced_per_frame() const { return static_cast<int>(kept.size()); }

    Eigen::VectorXd lift(const Eigen::VectorXd& reduced) const {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(n) * full_per_frame());
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < reduced_per_frame(); ++k) {
                full(i * full_per_frame() + kept[k]) = reduced(i * reduced_per_frame() + k);
            }
        }
        return full;
    }

    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n) * reduced_per_frame());
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < reduced_per_frame(); ++k) {
                r(i * reduced_per_frame() + k) = full(i * full_per_frame() + kept[k]);
            }
        }
        return r;
    }

    // The selector as an explicit matrix with orthonormal columns.
    Eigen::SparseMatrix<double> matrix() const {
        Eigen::SparseMatrix<double> x(static_cast<Eigen::Index>(n) * full_per_frame(),
                                      static_cast<Eigen::Index>(n) * reduced_per_frame());
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < reduced_per_frame(); ++k) {
                trip.emplace_back(i * full_per_frame() + kept[k],
                                  i * reduced_per_frame() + k, 1.0);
            }
        }
        x.setFromTriplets(trip.begin(), trip.end());
        return x;
    }
};

inline AffineMaskSelector build_affine_mask_selector(int n, int hom_dim) {
    AffineMaskSelector sel;
    sel.n = n;
    sel.hom_dim = hom_dim;
    for (int col = 0; col < hom_dim; ++col) {
        for (int row = 0; row < hom_dim - 1; ++row) {  // drop the last row
            sel.kept.push_back(col * hom_dim + row);
        }
    }
    return sel;
}

struct AffineOptions {
    int max_iters = 5;       // masked refinement iterations; 0 = direct steps only
    double rel_tol = 1e-8;
    bool damped = true;
    double rotation_weight = 1.0;  // weight on the linear-part residual
    // run_euclidean: re-project the Q part onto O(d) after each accepted
    // step so the output stays exactly Euclidean
    bool reproject_euclidean = true;
};

namespace detail {

// Masked Gauss-Newton refinement on homogeneous frames: solves the
// reduced system X^T H_GN X v = -X^T c_GN and lifts x = X v.
inline void masked_gn_refine(const FrameGraph& g, const EdgeTransforms& t_hom,
                             std::vector<Eigen::MatrixXd>& frames,
                             const AffineOptions& opts, bool euclidean) {
    const int n = g.n;
    const int hom = t_hom.d;
    const int d = hom - 1;
    const AffineMaskSelector sel = build_affine_mask_selector(n, hom);
    const Eigen::SparseMatrix<double> x_sel = sel.matrix();

    Eigen::MatrixXd sqrt_weights;
    const bool weighted = opts.rotation_weight != 1.0;
    if (weighted) {
        sqrt_weights = Eigen::MatrixXd::Ones(hom, hom);
        sqrt_weights.topLeftCorner(d, d).setConstant(std::sqrt(opts.rotation_weight));
    }

    double g_cur = g_of_frames(g, t_hom, frames);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const GNSystem sys = weighted
                                 ? build_gn_system_weighted(g, t_hom, frames, sqrt_weights)
                                 : build_gn_system(g, t_hom, frames);
        const Eigen::SparseMatrix<double> hr =
            x_sel.transpose() * sys.h * x_sel;
        const Eigen::VectorXd cr = x_sel.transpose() * sys.c;
        const Eigen::VectorXd full = sel.lift(solve_normal_min_norm(hr, cr));

        double beta = 1.0;
        std::vector<Eigen::MatrixXd> candidate(frames.size());
        bool accepted = false;
        double g_next = 0.0;
        while (true) {
            for (int i = 0; i < n; ++i) {
                const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(
                    full.data() + static_cast<Eigen::Index>(i) * hom * hom, hom, hom);
                candidate[i] = frames[i] + beta * e;
                if (euclidean && opts.reproject_euclidean) {
                    candidate[i].topLeftCorner(d, d) =
                        orthogonal_polar_factor(candidate[i].topLeftCorner(d, d));
                }
            }
            g_next = g_of_frames(g, t_hom, candidate);
            if (!opts.damped || g_next <= g_cur) {
                accepted = true;
                break;
            }
            beta *= 0.5;
            if (beta < 1.0 / 16.0) break;
        }
        if (!accepted) break;
        frames = std::move(candidate);
        const double improvement = g_cur - g_next;
        g_cur = g_next;
        if (improvement < opts.rel_tol * std::max(g_cur, 1e-30)) break;
    }
}

inline FrameSolution run_affine_family(const FrameGraph& g, const EdgeTransforms& t_hom,
                                       const AffineOptions& opts, bool euclidean) {
    const int hom = t_hom.d;
    const int d = hom - 1;

    // (1) direct method on the linear parts
    EdgeTransforms q_obs(d);
    std::map<Edge, Eigen::VectorXd> t_obs;
    for (const auto& [e, m] : t_hom.map) {
        const AffineTransform a = split_homogeneous(m);
        q_obs.map[e] = a.q;
        t_obs[e] = a.t;
    }
    FrameSolution linear = solve_h(g, q_obs);
    if (euclidean) linear = project_orthogonal(linear);

    // (2) translations from (P8)
    const std::vector<Eigen::VectorXd> translations =
        solve_translations(g, linear.frames, t_obs);
    std::vector<Eigen::MatrixXd> frames(g.n);
    for (int i = 0; i < g.n; ++i) {
        frames[i] = AffineTransform{linear.frames[i], translations[i]}.homogeneous();
    }

    // (3)-(4) masked refinement on the homogeneous matrices
    if (opts.max_iters > 0) {
        masked_gn_refine(g, t_hom, frames, opts, euclidean);
    }

    FrameSolution out;
    out.d = hom;
    out.method = euclidean ? "euclidean" : "affine";
    out.frames = std::move(frames);
    return out;
}

}  // namespace detail

// Affine synchronization: direct method on the linear parts, translation
// solve, then masked Gauss-Newton on the homogeneous matrices. Output
// frames are exactly affine.
inline FrameSolution run_affine(const FrameGraph& g, const EdgeTransforms& t_hom,
                                const AffineOptions& opts = {}) {
    if (!is_connected(g)) {
        throw DisconnectedGraph("run_affine requires a connected graph");
    }
    return detail::run_affine_family(g, t_hom, opts, /*euclidean=*/false);
}

// Euclidean variant: the linear-part step runs the orthogonal pipeline
// (H-method plus projection), and accepted refinement steps re-project
// the Q part so outputs stay in E(d).
inline FrameSolution run_euclidean(const FrameGraph& g, const EdgeTransforms& t_hom,
                                   const AffineOptions& opts = {}) {
    if (!is_connected(g)) {
        throw DisconnectedGraph("run_euclidean requires a connected graph");
    }
    return detail::run_affine_family(g, t_hom, opts, /*euclidean=*/true);
}

}  // namespace framesync
