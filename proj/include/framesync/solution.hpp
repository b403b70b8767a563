#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "framesync/graph.hpp"
#include "framesync/transforms.hpp"

namespace framesync {

// Per-frame transforms recovered by a solver: one representative of a
// left-equivalence class (any global left multiplier gives the same
// pairwise set G_i^{-1} G_j).
struct FrameSolution {
    int d = 0;
    std::vector<Eigen::MatrixXd> frames;
    std::string method;

    struct BlockConditioning {
        double min_sv = 0.0;
        double max_sv = 0.0;
    };
    std::vector<BlockConditioning> conditioning;

    int n() const { return static_cast<int>(frames.size()); }

    Eigen::MatrixXd pairwise(int i, int j) const {
        return frames[i].partialPivLu().solve(frames[j]);
    }

    EdgeTransforms pairwise_set(const FrameGraph& g) const {
        return pairwise_from_frames(g, frames);
    }
};

// Two solutions are the same synchronization iff one global left
// multiplier Q = b_1 a_1^{-1} maps every frame of a onto b.
inline bool left_equivalent(const FrameSolution& a, const FrameSolution& b,
                            double tol = 1e-8) {
    if (a.n() != b.n() || a.n() == 0) return false;
    const Eigen::MatrixXd q = b.frames[0] * a.frames[0].inverse();
    for (int i = 0; i < a.n(); ++i) {
        const double scale = std::max(1.0, b.frames[i].norm());
        if ((q * a.frames[i] - b.frames[i]).norm() > tol * scale) return false;
    }
    return true;
}

// Residual metrics of a solution against the observed transforms.
//   g  = sum over edges of 1/2 ||G_ij - G_i^{-1} G_j||_F^2
//   f  = sum over edges of 1/2 ||G_ij G_j^{-1} - G_i^{-1}||_F^2
//   g' = (1/|E|) sum over edges of ||G_ij - G_i^{-1} G_j||_F^2
// g' has no 1/2 factor and divides by the edge count exactly as printed.
struct SyncReport {
    double g_total = 0.0;
    double g_prime = 0.0;
    double f_value = 0.0;
    double gap_h = -1.0;  // < 0: not an orthogonal-pipeline run
    bool gap_exact = false;
    std::map<Edge, double> per_edge;  // squared residual per edge
    double runtime_ms = 0.0;
};

// f evaluated at explicitly given inverse blocks Y_i (the solvers work
// with these directly; scaling conventions of the gap bound need f at
// sqrt(n)-scaled arguments).
inline double f_of_inverses(const FrameGraph& g, const EdgeTransforms& observed,
                            const std::vector<Eigen::MatrixXd>& inv_frames) {
    double f = 0.0;
    for (const auto& [i, j] : g.edges) {
        f += 0.5 * (observed.at(i, j) * inv_frames[j] - inv_frames[i]).squaredNorm();
    }
    return f;
}

// g evaluated at bare frames, without assembling a full report.
inline double g_of_frames(const FrameGraph& g, const EdgeTransforms& observed,
                          const std::vector<Eigen::MatrixXd>& frames) {
    double total = 0.0;
    for (const auto& [i, j] : g.edges) {
        total += 0.5 * (observed.at(i, j) - frames[i].partialPivLu().solve(frames[j]))
                           .squaredNorm();
    }
    return total;
}

inline SyncReport metrics(const FrameGraph& g, const EdgeTransforms& observed,
                          const FrameSolution& s) {
    SyncReport r;
    std::vector<Eigen::MatrixXd> inv(s.n());
    for (int i = 0; i < s.n(); ++i) inv[i] = s.frames[i].inverse();
    double residual_sum = 0.0;  // g' accumulated per its own formula, not as 2g/|E|
    for (const auto& [i, j] : g.edges) {
        const double res = (observed.at(i, j) - inv[i] * s.frames[j]).squaredNorm();
        r.per_edge[{i, j}] = res;
        r.g_total += 0.5 * res;
        residual_sum += res;
    }
    const int m = g.edge_count();
    r.g_prime = m > 0 ? residual_sum / m : 0.0;
    r.f_value = f_of_inverses(g, observed, inv);
    return r;
}

// Projects every frame onto O(d); each output is the Frobenius-nearest
// orthogonal matrix to its input.
inline FrameSolution project_orthogonal(const FrameSolution& s) {
    FrameSolution out = s;
    out.method = s.method + "+proj";
    for (auto& f : out.frames) f = orthogonal_polar_factor(f);
    return out;
}

}  // namespace framesync
