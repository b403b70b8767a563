#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <map>
#include <vector>

#include "framesync/graph.hpp"

namespace framesync {

// Pairwise transforms keyed by directed edge. Storage does not require
// invertibility -- noisy observations may be near-singular -- solvers
// check conditioning where they need inverses.
struct EdgeTransforms {
    int d = 0;
    std::map<Edge, Eigen::MatrixXd> map;

    EdgeTransforms() = default;
    explicit EdgeTransforms(int dim) : d(dim) {}

    const Eigen::MatrixXd& at(int i, int j) const { return map.at({i, j}); }

    void set(int i, int j, Eigen::MatrixXd value) {
        map[{i, j}] = std::move(value);
    }

    bool covers(const FrameGraph& g) const {
        for (const auto& e : g.edges) {
            if (!map.count(e)) return false;
        }
        return true;
    }
};

// Pairwise set G_ij = G_i^{-1} G_j induced by per-frame transforms,
// restricted to the edges of g. Transitively consistent by construction.
inline EdgeTransforms pairwise_from_frames(const FrameGraph& g,
                                           const std::vector<Eigen::MatrixXd>& frames) {
    EdgeTransforms t(frames.empty() ? 0 : static_cast<int>(frames[0].rows()));
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
    lu.reserve(frames.size());
    for (const auto& f : frames) lu.emplace_back(f);
    for (const auto& [i, j] : g.edges) {
        t.map[{i, j}] = lu[i].solve(frames[j]);
    }
    return t;
}

// Frobenius-nearest orthogonal matrix: the orthogonal polar factor U V^T
// from the SVD U D V^T.
inline Eigen::MatrixXd orthogonal_polar_factor(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
}

inline double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().minCoeff();
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues().maxCoeff() / smin;
}

}  // namespace framesync
