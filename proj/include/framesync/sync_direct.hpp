#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "framesync/block_matrix.hpp"
#include "framesync/solution.hpp"
#include "framesync/spectral.hpp"

namespace framesync {

inline constexpr double kSingularBlockCondition = 1e12;

namespace detail {

// Reads the d x d blocks of V1 as the frame inverses and inverts them.
// The subspace methods produce V1 with blocks G_i^{-1} Q for one common Q,
// so the inverted blocks are a left-equivalent set of frames.
inline FrameSolution extract_frames(const Eigen::MatrixXd& v1, int n, int d,
                                    const std::string& method) {
    FrameSolution s;
    s.d = d;
    s.method = method;
    s.frames.reserve(n);
    s.conditioning.reserve(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXd block = v1.middleRows(i * d, d);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(d - 1);
        if (!(smin > 0.0) || smax / smin > kSingularBlockCondition) {
            throw SingularBlock("extracted block " + std::to_string(i + 1) +
                                " is numerically singular; input too far from consistency");
        }
        s.conditioning.push_back({smin, smax});
        // invert via the SVD already at hand
        s.frames.push_back(svd.matrixV() *
                           svd.singularValues().cwiseInverse().asDiagonal() *
                           svd.matrixU().transpose());
    }
    return s;
}

}  // namespace detail

// Z-matrix method: synchronized frames from the smallest right-singular
// subspace of Z. Applicable iff the graph is quasi-strongly connected.
inline FrameSolution solve_z(const FrameGraph& g, const EdgeTransforms& t) {
    if (!is_qsc(g)) {
        throw NonQscGraph("solve_z requires a quasi-strongly connected graph");
    }
    const BlockMatrix z = build_z(g, t);
    const Eigen::MatrixXd v1 = smallest_singular_subspace(z, t.d);
    return detail::extract_frames(v1, g.n, t.d, "z");
}

// H-matrix method: same extraction applied to H = Z + Z2, the Hessian of
// the quadratic objective f. Needs only a connected graph.
inline FrameSolution solve_h(const FrameGraph& g, const EdgeTransforms& t) {
    if (!is_connected(g)) {
        throw DisconnectedGraph("solve_h requires a connected graph");
    }
    const BlockMatrix h = build_h(g, t);
    const Eigen::MatrixXd v1 = smallest_singular_subspace(h, t.d);
    return detail::extract_frames(v1, g.n, t.d, "h");
}

// Upper bound on the optimality gap of the projected orthogonal solution:
//   h = (g({G**}) - f({sqrt(n) G*^{-1}})) / f({sqrt(n) G*^{-1}})
// where G* are the unprojected frames of the subspace method (orthonormal
// V1, so the sqrt(n) scaling makes the relaxation bound apply) and G** the
// projected ones. f is evaluated at the scaled arguments directly and
// cross-checked against n * f(unscaled) -- the two must agree, they are
// the same quantity by degree-2 homogeneity.
struct GapBound {
    double h = 0.0;
    bool exact = false;  // consistent input, f = 0, h reported as 0
};

inline GapBound gap_bound(const FrameSolution& unprojected, const FrameSolution& projected,
                          const FrameGraph& g, const EdgeTransforms& t) {
    const int n = unprojected.n();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<Eigen::MatrixXd> inv(n), scaled_inv(n);
    for (int i = 0; i < n; ++i) {
        inv[i] = unprojected.frames[i].inverse();
        scaled_inv[i] = sqrt_n * inv[i];
    }
    const double f_scaled = f_of_inverses(g, t, scaled_inv);
    const double f_unscaled = f_of_inverses(g, t, inv);
    GapBound out;
    if (f_scaled < 1e-18) {
        out.exact = true;
        out.h = 0.0;
        return out;
    }
    if (std::abs(f_scaled - n * f_unscaled) > 1e-10 * f_scaled) {
        throw SyncError("gap_bound: homogeneity cross-check failed");
    }
    const double g_projected = metrics(g, t, projected).g_total;
    out.h = (g_projected - f_scaled) / f_scaled;
    return out;
}

// Solves (P3) for a given symmetric positive definite Q: the subspace V
// from (P5), then the d x d factor from (P6) by pairing the ascending
// eigenvalues of V^T H V with the descending eigenvalues of Q.
inline FrameSolution solve_p3(const FrameGraph& g, const EdgeTransforms& t,
                              const Eigen::MatrixXd& q) {
    if (!is_connected(g)) {
        throw DisconnectedGraph("solve_p3 requires a connected graph");
    }
    const int d = t.d;
    const BlockMatrix h = build_h(g, t);
    const Eigen::MatrixXd v = smallest_singular_subspace(h, d);

    const Eigen::MatrixXd m = v.transpose() * (h.dense() * v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em((m + m.transpose()) / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(q);
    if (eq.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError("solve_p3: Q must be positive definite");
    }
    // P = S Q^{1/2} with S orthogonal; tr(P^T M P) is minimized when the
    // small eigendirections of M carry the large eigenvalues of Q.
    Eigen::MatrixXd flip = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) flip(k, d - 1 - k) = 1.0;  // eq is ascending
    const Eigen::MatrixXd q_sqrt = eq.operatorSqrt();
    const Eigen::MatrixXd s = em.eigenvectors() * flip * eq.eigenvectors().transpose();
    const Eigen::MatrixXd x = v * (s * q_sqrt);
    return detail::extract_frames(x, g.n, d, "p3");
}

// The value of g obtained through (P3) is independent of the choice of Q;
// returns true iff the solutions for q1 and q2 agree on g and are
// left-equivalent.
inline bool q_independence_check(const FrameGraph& g, const EdgeTransforms& t,
                                 const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                                 double tol = 1e-8) {
    const FrameSolution a = solve_p3(g, t, q1);
    const FrameSolution b = solve_p3(g, t, q2);
    const double ga = metrics(g, t, a).g_total;
    const double gb = metrics(g, t, b).g_total;
    if (std::abs(ga - gb) > tol * std::max({ga, gb, 1e-12})) return false;
    return left_equivalent(a, b, 1e-6);
}

// Reference-based baseline: draw a random spanning tree, pin the identity
// at its center and propagate G_i = G_j G_ij^{-1} along the tree edges.
// Discards all inconsistency information outside the tree.
inline FrameSolution reference_baseline(const FrameGraph& g, const EdgeTransforms& t,
                                        Rng& rng) {
    const FrameGraph tree = random_min_qsc_subgraph(g, rng);  // throws if not QSC
    const int d = t.d;
    FrameSolution s;
    s.d = d;
    s.method = "ref";
    s.frames.assign(g.n, Eigen::MatrixXd::Identity(d, d));
    if (g.n == 1) return s;

    // the unique node with no out-edge in the tree is the chosen center
    std::vector<std::vector<int>> tree_in = tree.in_lists();
    std::vector<int> outdeg(g.n, 0);
    for (const auto& [i, j] : tree.edges) ++outdeg[i];
    int root = -1;
    for (int i = 0; i < g.n; ++i) {
        if (outdeg[i] == 0) root = i;
    }
    std::vector<int> order = {root};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int j = order[k];
        for (int i : tree_in[j]) {
            const Eigen::MatrixXd& gij = t.at(i, j);
            if (condition_number(gij) > kSingularBlockCondition) {
                throw SingularEdgeMatrix("reference_baseline: tree edge transform is singular");
            }
            s.frames[i] = s.frames[j] * gij.inverse();
            order.push_back(i);
        }
    }
    return s;
}

}  // namespace framesync
