#pragma once

#include <Eigen/Dense>
#include <vector>

#include "framesync/sync_direct.hpp"

namespace framesync {

struct FlowState {
    std::vector<Eigen::MatrixXd> frames;
    double time = 0.0;
    double energy = 0.0;  // g at the current frames
    int steps = 0;
    int halvings = 0;
    int reorthonormalizations = 0;
};

struct FlowOptions {
    double horizon = 10.0;
    double step = 0.01;
    double drift_tol = 1e-6;  // re-orthonormalize when ||G^T G - I|| exceeds this
    bool init_from_z = false; // Algorithm-5 initializer via Z instead of H
};

namespace detail {

inline double flow_energy(const FrameGraph& g, const EdgeTransforms& t,
                          const std::vector<Eigen::MatrixXd>& frames) {
    return g_of_frames(g, t, frames);
}

}  // namespace detail

// Negative Riemannian gradient of g on (O(d))^n. With S = G_i G_ij G_j^T
// per out-edge and T = G_j G_ji G_i^T per in-edge, the tangent update at
// frame i is (S^T - S) G_i + (T - T^T) G_i; G_i^T Gdot_i is skew, so the
// flow stays tangent to the manifold and g is non-increasing along it.
inline std::vector<Eigen::MatrixXd> flow_rhs(const FrameGraph& g, const EdgeTransforms& t,
                                             const std::vector<Eigen::MatrixXd>& frames) {
    const int d = t.d;
    std::vector<Eigen::MatrixXd> rhs(g.n, Eigen::MatrixXd::Zero(d, d));
    for (const auto& [i, j] : g.edges) {
        const Eigen::MatrixXd s = frames[i] * t.at(i, j) * frames[j].transpose();
        rhs[i] += (s.transpose() - s) * frames[i];
        rhs[j] += (s - s.transpose()) * frames[j];
    }
    return rhs;
}

// Classical fixed-step 4th-order integration of the flow with drift
// control. If g increases on two consecutive steps the last step is
// rolled back and the step size halved, down to a floor.
inline FlowState integrate_flow(const FrameGraph& g, const EdgeTransforms& t,
                                const std::vector<Eigen::MatrixXd>& init, double horizon,
                                double step, double drift_tol = 1e-6) {
    FlowState st;
    st.frames = init;
    st.energy = detail::flow_energy(g, t, st.frames);
    const double initial_energy = st.energy;
    const double floor = step / 1024.0;
    double h = step;
    double prev_energy = st.energy;
    int rises = 0;

    const auto add_scaled = [&](const std::vector<Eigen::MatrixXd>& base,
                                const std::vector<Eigen::MatrixXd>& dir, double scale) {
        std::vector<Eigen::MatrixXd> out(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + scale * dir[i];
        return out;
    };

    while (st.time < horizon - 1e-12) {
        const double hh = std::min(h, horizon - st.time);
        const std::vector<Eigen::MatrixXd> before = st.frames;

        const auto k1 = flow_rhs(g, t, st.frames);
        const auto k2 = flow_rhs(g, t, add_scaled(st.frames, k1, hh / 2.0));
        const auto k3 = flow_rhs(g, t, add_scaled(st.frames, k2, hh / 2.0));
        const auto k4 = flow_rhs(g, t, add_scaled(st.frames, k3, hh));
        for (std::size_t i = 0; i < st.frames.size(); ++i) {
            st.frames[i] += (hh / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }

        for (auto& f : st.frames) {
            const double drift =
                (f.transpose() * f - Eigen::MatrixXd::Identity(t.d, t.d)).norm();
            if (drift > drift_tol) {
                f = orthogonal_polar_factor(f);
                ++st.reorthonormalizations;
            }
        }

        const double energy = detail::flow_energy(g, t, st.frames);
        if (energy > prev_energy + std::max(1e-12 * prev_energy, 1e-18)) {
            ++rises;
            if (rises >= 2) {
                st.frames = before;  // roll back and retry smaller
                h /= 2.0;
                ++st.halvings;
                rises = 0;
                if (h < floor) {
                    // residual oscillation at the attractor; a rise past
                    // the initial energy is genuine instability
                    if (energy > initial_energy) {
                        throw SolverError("integrate_flow: step-size instability");
                    }
                    break;
                }
                continue;
            }
        } else {
            rises = 0;
        }
        prev_energy = energy;
        st.time += hh;
        ++st.steps;
        st.energy = energy;
    }
    return st;
}

// Baseline pipeline: orthogonal direct solution, gradient flow from it,
// final projection back onto O(d).
inline std::pair<FrameSolution, SyncReport> run_algorithm8(const FrameGraph& g,
                                                           const EdgeTransforms& t,
                                                           const FlowOptions& opts = {}) {
    const FrameSolution raw = opts.init_from_z ? solve_z(g, t) : solve_h(g, t);
    const FrameSolution init = project_orthogonal(raw);
    FlowState st = integrate_flow(g, t, init.frames, opts.horizon, opts.step);

    FrameSolution out;
    out.d = t.d;
    out.method = "gradflow";
    out.frames = std::move(st.frames);
    for (auto& f : out.frames) f = orthogonal_polar_factor(f);

    SyncReport report = metrics(g, t, out);
    const GapBound gap = gap_bound(raw, out, g, t);
    report.gap_h = gap.h;
    report.gap_exact = gap.exact;
    return {out, report};
}

}  // namespace framesync
