#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "framesync/graph.hpp"
#include "framesync/transforms.hpp"

namespace framesync {

// nd x nd matrix with d x d block structure, block (i, j) addressed by
// frame indices. Stored sparse: the builders below only fill blocks on
// graph edges plus the diagonal, and the harness sweeps can grow past
// what a dense nd x nd buffer should hold.
class BlockMatrix {
public:
    BlockMatrix(int n, int d)
        : n_(n), d_(d), mat_(static_cast<Eigen::Index>(n) * d, static_cast<Eigen::Index>(n) * d) {}

    BlockMatrix(int n, int d, Eigen::SparseMatrix<double> mat)
        : n_(n), d_(d), mat_(std::move(mat)) {}

    int n() const { return n_; }
    int d() const { return d_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(n_) * d_; }

    const Eigen::SparseMatrix<double>& sparse() const { return mat_; }
    Eigen::SparseMatrix<double>& sparse() { return mat_; }

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }

    Eigen::MatrixXd block(int i, int j) const {
        return Eigen::MatrixXd(mat_.block(static_cast<Eigen::Index>(i) * d_,
                                          static_cast<Eigen::Index>(j) * d_, d_, d_));
    }

    void set_from_triplets(const std::vector<Eigen::Triplet<double>>& triplets) {
        mat_.setFromTriplets(triplets.begin(), triplets.end());
    }

private:
    int n_;
    int d_;
    Eigen::SparseMatrix<double> mat_;
};

namespace detail {

inline void require_cover(const FrameGraph& g, const EdgeTransforms& t) {
    if (!t.covers(g)) {
        throw SyncError("missing transform for a graph edge");
    }
}

inline void push_block(std::vector<Eigen::Triplet<double>>& out, int bi, int bj, int d,
                       const Eigen::MatrixXd& m, double scale = 1.0) {
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            const double v = scale * m(r, c);
            if (v != 0.0) out.emplace_back(bi * d + r, bj * d + c, v);
        }
    }
}

}  // namespace detail

// W: block (i, j) = G_ij on edges, zero elsewhere (diagonal included).
inline BlockMatrix build_w(const FrameGraph& g, const EdgeTransforms& t) {
    detail::require_cover(g, t);
    const int d = t.d;
    BlockMatrix w(g.n, d);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.edge_count() * d * d);
    for (const auto& [i, j] : g.edges) {
        detail::push_block(trip, i, j, d, t.at(i, j));
    }
    w.set_from_triplets(trip);
    return w;
}

// Z = diag(out-degrees) (x) I_d - W. For transitively consistent inputs
// Z factors through L (x) I_d and annihilates the stacked frame inverses.
inline BlockMatrix build_z(const FrameGraph& g, const EdgeTransforms& t) {
    detail::require_cover(g, t);
    const int d = t.d;
    BlockMatrix z(g.n, d);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve((g.edge_count() + g.n) * d * d);
    std::vector<int> outdeg(g.n, 0);
    for (const auto& [i, j] : g.edges) {
        ++outdeg[i];
        detail::push_block(trip, i, j, d, t.at(i, j), -1.0);
    }
    for (int i = 0; i < g.n; ++i) {
        for (int r = 0; r < d; ++r) {
            if (outdeg[i] != 0) trip.emplace_back(i * d + r, i * d + r, outdeg[i]);
        }
    }
    z.set_from_triplets(trip);
    return z;
}

// Z2 of the reversed graph with transposed-and-swapped transforms:
// block (i, j) = -G_ji^T on reversed edges; diagonal block (i, i) is the
// (i, i) block of Wbar Wbar^T, i.e. the sum of G_ji^T G_ji over in-edges.
inline BlockMatrix build_z2(const FrameGraph& g, const EdgeTransforms& t) {
    detail::require_cover(g, t);
    const int d = t.d;
    BlockMatrix z2(g.n, d);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve((g.edge_count() + g.n) * d * d);
    std::vector<Eigen::MatrixXd> diag(g.n, Eigen::MatrixXd::Zero(d, d));
    for (const auto& [j, i] : g.edges) {
        const Eigen::MatrixXd gt = t.at(j, i).transpose();  // block (i, j) of Wbar
        diag[i] += gt * gt.transpose();
        detail::push_block(trip, i, j, d, gt, -1.0);
    }
    for (int i = 0; i < g.n; ++i) {
        detail::push_block(trip, i, i, d, diag[i]);
    }
    z2.set_from_triplets(trip);
    return z2;
}

// H = Z + Z2: the Hessian of the quadratic objective f. Symmetric positive
// semi-definite; kernel dimension d characterises transitive consistency
// on connected graphs.
inline BlockMatrix build_h(const FrameGraph& g, const EdgeTransforms& t) {
    BlockMatrix z = build_z(g, t);
    const BlockMatrix z2 = build_z2(g, t);
    z.sparse() += z2.sparse();
    return BlockMatrix(g.n, t.d, z.sparse());
}

}  // namespace framesync
