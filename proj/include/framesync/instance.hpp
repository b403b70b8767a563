#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <string>
#include <vector>

#include "framesync/affine.hpp"
#include "framesync/graph.hpp"
#include "framesync/transforms.hpp"

namespace framesync {

inline Eigen::MatrixXd random_gaussian_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) m(r, c) = rng.gaussian();
    }
    return m;
}

// Uniform-ish draw from O(d): the orthogonal polar factor of an i.i.d.
// Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
    return orthogonal_polar_factor(random_gaussian_matrix(d, d, rng));
}

// Random rotation near the identity: exp(S) for a skew-symmetric S drawn
// uniformly from the ball of the given radius. The ball is in the
// Euclidean norm of the d(d-1)/2 independent entries, which for d = 3
// equals the rotation angle of exp(S).
inline Eigen::MatrixXd geodesic_noise(int d, double radius, Rng& rng) {
    const int m = d * (d - 1) / 2;
    Eigen::VectorXd v(m);
    for (int k = 0; k < m; ++k) v(k) = rng.gaussian();
    const double u = rng.uniform();
    double norm = v.norm();
    if (norm == 0.0) norm = 1.0;
    v *= radius * std::pow(u, 1.0 / m) / norm;

    Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(d, d);
    int idx = 0;
    for (int c = 0; c < d; ++c) {
        for (int r = c + 1; r < d; ++r) {
            skew(r, c) = v(idx);
            skew(c, r) = -v(idx);
            ++idx;
        }
    }
    return skew.exp();
}

enum class TransformClass { Orthogonal, Linear, Affine, Euclidean };
enum class NoiseModel { GaussianProjected, GaussianRaw, Geodesic };

inline std::string to_string(TransformClass c) {
    switch (c) {
        case TransformClass::Orthogonal: return "orthogonal";
        case TransformClass::Linear: return "linear";
        case TransformClass::Affine: return "affine";
        case TransformClass::Euclidean: return "euclidean";
    }
    return "?";
}

inline std::string to_string(NoiseModel m) {
    switch (m) {
        case NoiseModel::GaussianProjected: return "gauss-proj";
        case NoiseModel::GaussianRaw: return "gauss-raw";
        case NoiseModel::Geodesic: return "geodesic";
    }
    return "?";
}

// Default perturbation per class: orthogonal and Euclidean linear parts
// are re-projected onto O(d) after the element-wise noise, general linear
// and affine ones are left as drawn.
inline NoiseModel default_noise_model(TransformClass c) {
    switch (c) {
        case TransformClass::Orthogonal:
        case TransformClass::Euclidean: return NoiseModel::GaussianProjected;
        case TransformClass::Linear:
        case TransformClass::Affine: return NoiseModel::GaussianRaw;
    }
    return NoiseModel::GaussianProjected;
}

struct InstanceSpec {
    int n = 30;
    int d = 3;                 // spatial dimension
    double sigma = 0.3;        // element-wise Gaussian noise std
    double rho = 0.5;          // graph density target
    TransformClass transform_class = TransformClass::Orthogonal;
    NoiseModel noise_model = NoiseModel::GaussianProjected;
    double geodesic_radius = M_PI / 4.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2 || d < 2 || sigma < 0.0 || rho < 0.0 || rho > 1.0) {
            throw ConfigError("invalid instance spec");
        }
    }

    // dimension of the matrices handed to the solvers
    int matrix_dim() const {
        return (transform_class == TransformClass::Affine ||
                transform_class == TransformClass::Euclidean)
                   ? d + 1
                   : d;
    }
};

struct ProblemInstance {
    InstanceSpec spec;
    FrameGraph graph;
    GraphDensity density;
    std::vector<Eigen::MatrixXd> ground_truth;  // homogeneous for affine classes
    EdgeTransforms consistent;
    EdgeTransforms observed;
};

namespace detail {

inline Eigen::MatrixXd perturb_linear(const Eigen::MatrixXd& q, const InstanceSpec& spec,
                                      Rng& rng) {
    const int d = static_cast<int>(q.rows());
    if (spec.sigma == 0.0 && spec.noise_model != NoiseModel::Geodesic) {
        return q;  // exact, no re-projection round-off
    }
    switch (spec.noise_model) {
        case NoiseModel::GaussianRaw:
            return q + spec.sigma * random_gaussian_matrix(d, d, rng);
        case NoiseModel::GaussianProjected:
            return orthogonal_polar_factor(q + spec.sigma * random_gaussian_matrix(d, d, rng));
        case NoiseModel::Geodesic:
            return q * geodesic_noise(d, spec.geodesic_radius, rng);
    }
    return q;
}

}  // namespace detail

// Ground-truth frames, the consistent pairwise set over a random QSC graph
// of the requested density, and the noisy observation of it.
inline ProblemInstance make_instance(const InstanceSpec& spec) {
    spec.validate();
    ProblemInstance inst;
    inst.spec = spec;
    Rng rng(spec.seed);

    auto [tree, density] = generate_min_qsc(spec.n, rng);
    inst.density = density;
    inst.graph = densify(tree, density.qsc_edges, spec.rho, rng);
    inst.density.rho = graph_density(inst.graph, density.qsc_edges);

    const bool homogeneous = spec.matrix_dim() != spec.d;
    inst.ground_truth.reserve(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        const Eigen::MatrixXd q = random_orthogonal(spec.d, rng);
        if (homogeneous) {
            Eigen::VectorXd t(spec.d);
            for (int k = 0; k < spec.d; ++k) t(k) = rng.uniform(-5.0, 5.0);
            inst.ground_truth.push_back(AffineTransform{q, t}.homogeneous());
        } else {
            inst.ground_truth.push_back(q);
        }
    }

    if (!homogeneous) {
        inst.consistent = pairwise_from_frames(inst.graph, inst.ground_truth);
    } else {
        // compose in affine parts so the homogeneous last row stays exact
        inst.consistent = EdgeTransforms(spec.matrix_dim());
        std::vector<AffineTransform> inv_parts;
        inv_parts.reserve(spec.n);
        for (const auto& gt : inst.ground_truth) {
            inv_parts.push_back(split_homogeneous(gt).inverse());
        }
        for (const auto& [i, j] : inst.graph.edges) {
            const AffineTransform aj = split_homogeneous(inst.ground_truth[j]);
            const AffineTransform rel{inv_parts[i].q * aj.q,
                                      inv_parts[i].q * aj.t + inv_parts[i].t};
            inst.consistent.map[{i, j}] = rel.homogeneous();
        }
    }
    inst.observed = EdgeTransforms(spec.matrix_dim());
    for (const auto& [i, j] : inst.graph.edges) {
        const Eigen::MatrixXd& exact = inst.consistent.at(i, j);
        if (!homogeneous) {
            inst.observed.map[{i, j}] = detail::perturb_linear(exact, spec, rng);
        } else {
            const AffineTransform a = split_homogeneous(exact);
            Eigen::VectorXd noise(spec.d);
            for (int k = 0; k < spec.d; ++k) noise(k) = rng.gaussian();
            const AffineTransform noisy{detail::perturb_linear(a.q, spec, rng),
                                        a.t + spec.sigma * noise};
            inst.observed.map[{i, j}] = noisy.homogeneous();
        }
    }
    return inst;
}

// Instance for the optimality-gap replication: a QSC graph on n nodes
// whose adjacency matrix has `zero_entries` absent ordered pairs (the
// complete graph minus that many random edges), orthogonal ground truth,
// and geodesic noise G_ij = G_i^{-1} G_j R_ij.
inline ProblemInstance make_gap_instance(int n, int d, double radius, int zero_entries,
                                         std::uint64_t seed) {
    if (zero_entries < 0 || zero_entries > n * (n - 1) - n) {
        throw ConfigError("make_gap_instance: zero_entries out of range");
    }
    ProblemInstance inst;
    inst.spec.n = n;
    inst.spec.d = d;
    inst.spec.sigma = 0.0;
    inst.spec.transform_class = TransformClass::Orthogonal;
    inst.spec.noise_model = NoiseModel::Geodesic;
    inst.spec.geodesic_radius = radius;
    inst.spec.seed = seed;
    Rng rng(seed);

    for (int attempt = 0; attempt < 16; ++attempt) {
        FrameGraph g(n);
        std::vector<Edge> all;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j) all.push_back({i, j});
            }
        }
        for (int k = 0; k < zero_entries; ++k) {
            const int pick = rng.uniform_int(0, static_cast<int>(all.size()) - 1);
            all.erase(all.begin() + pick);
        }
        for (const auto& e : all) g.edges.insert(e);
        if (!is_qsc(g)) continue;  // essentially impossible at this density
        inst.graph = std::move(g);
        break;
    }
    if (inst.graph.n == 0) {
        throw SyncError("make_gap_instance: failed to draw a QSC graph");
    }
    inst.density.rho = graph_density(inst.graph, {});

    inst.ground_truth.reserve(n);
    for (int i = 0; i < n; ++i) inst.ground_truth.push_back(random_orthogonal(d, rng));
    inst.consistent = pairwise_from_frames(inst.graph, inst.ground_truth);
    inst.observed = EdgeTransforms(d);
    for (const auto& [i, j] : inst.graph.edges) {
        inst.observed.map[{i, j}] = inst.consistent.at(i, j) * geodesic_noise(d, radius, rng);
    }
    return inst;
}

}  // namespace framesync
