#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "framesync/solution.hpp"
#include "framesync/spectral.hpp"
#include "framesync/sync_direct.hpp"

namespace framesync {

enum class ProtocolVariant { Z, H };

struct ProtocolConfig {
    ProtocolVariant variant = ProtocolVariant::Z;
    double epsilon = 0.01;      // step size used throughout the figures
    bool auto_epsilon = false;  // pick 0.9 / rho estimate instead
    std::uint64_t seed = 0;
    int trace_every = 100;
    // Orthogonal runs project the node states before reading frames off
    // them; the H variant without projection takes raw inverses.
    bool project_on_finalize = true;
};

struct TraceRow {
    int round = 0;
    double g_prime = 0.0;
    double max_state_norm = 0.0;
};

struct ProtocolTrace {
    std::vector<TraceRow> rows;
    long long messages = 0;
    int rounds = 0;
};

// Synchronous-round simulator for the two consensus-style protocols.
// Every node updates simultaneously from the previous round's neighbour
// snapshots, which makes T rounds equal the stacked linear recursion
// X(t+1) = (I - eps M) X(t) with M the Z- or H-matrix.
class Simulator {
public:
    Simulator(FrameGraph g, EdgeTransforms t, ProtocolConfig cfg)
        : graph_(std::move(g)), transforms_(std::move(t)), cfg_(cfg) {
        if (cfg_.epsilon <= 0.0) {
            throw ConfigError("protocol step size must be positive");
        }
        const int d = transforms_.d;
        if (cfg_.variant == ProtocolVariant::Z) {
            if (!is_qsc(graph_)) {
                throw NonQscGraph("Z protocol requires a quasi-strongly connected graph");
            }
        } else {
            if (!is_connected(graph_)) {
                throw DisconnectedGraph("H protocol requires a connected graph");
            }
        }
        if (cfg_.auto_epsilon) {
            const BlockMatrix m = cfg_.variant == ProtocolVariant::Z
                                      ? build_z(graph_, transforms_)
                                      : build_h(graph_, transforms_);
            cfg_.epsilon = 0.9 / spectral_radius(m);
        }
        build_links();
        // X_i(0) entries i.i.d. uniform on (-0.5, 0.5) from per-node
        // streams derived from the master seed, so results do not depend
        // on node iteration order. The stacked X(0) is full rank with
        // probability one; redraw from a shifted seed otherwise.
        for (int attempt = 0; attempt < 16; ++attempt) {
            states_.assign(graph_.n, Eigen::MatrixXd(d, d));
            for (int i = 0; i < graph_.n; ++i) {
                Rng rng(derive_seed(cfg_.seed + attempt, static_cast<std::uint64_t>(i)));
                for (int c = 0; c < d; ++c) {
                    for (int r = 0; r < d; ++r) states_[i](r, c) = rng.uniform(-0.5, 0.5);
                }
            }
            if (stacked().jacobiSvd().rank() == d) break;
        }
    }

    const FrameGraph& graph() const { return graph_; }
    const EdgeTransforms& transforms() const { return transforms_; }
    const ProtocolConfig& config() const { return cfg_; }
    int rounds_run() const { return rounds_run_; }
    const std::vector<Eigen::MatrixXd>& states() const { return states_; }

    Eigen::MatrixXd stacked() const {
        const int d = transforms_.d;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(graph_.n) * d, d);
        for (int i = 0; i < graph_.n; ++i) x.middleRows(i * d, d) = states_[i];
        return x;
    }

    // One synchronous round; all nodes read round-t snapshots only.
    void round() {
        const double eps = cfg_.epsilon;
        std::vector<Eigen::MatrixXd> next = states_;
        for (int i = 0; i < graph_.n; ++i) {
            Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(transforms_.d, transforms_.d);
            for (const Link& link : links_[i]) {
                delta += link.gain * states_[link.neighbor] - link.loss * states_[i];
            }
            next[i] += eps * delta;
        }
        states_ = std::move(next);
        ++rounds_run_;
    }

    FrameSolution finalize() const {
        FrameSolution s;
        s.d = transforms_.d;
        s.frames.reserve(graph_.n);
        if (cfg_.variant == ProtocolVariant::Z || cfg_.project_on_finalize) {
            s.method = cfg_.variant == ProtocolVariant::Z ? "dist-z" : "dist-h";
            for (const auto& x : states_) {
                s.frames.push_back(orthogonal_polar_factor(x).transpose());
            }
        } else {
            s.method = "dist-h";
            for (const auto& x : states_) {
                if (condition_number(x) > kSingularBlockCondition) {
                    throw SingularBlock("distributed finalize: node state not invertible");
                }
                s.frames.push_back(x.inverse());
            }
        }
        return s;
    }

    ProtocolTrace run(int rounds) {
        ProtocolTrace trace;
        trace.rounds = rounds;
        auto record = [&] {
            TraceRow row;
            row.round = rounds_run_;
            row.g_prime = metrics(graph_, transforms_, finalize()).g_prime;
            row.max_state_norm = 0.0;
            for (const auto& x : states_) {
                row.max_state_norm = std::max(row.max_state_norm, x.norm());
            }
            trace.rows.push_back(row);
        };
        record();
        for (int r = 0; r < rounds; ++r) {
            round();
            if (rounds_run_ % cfg_.trace_every == 0 || r == rounds - 1) record();
        }
        trace.messages = static_cast<long long>(rounds) * com_edges_;
        return trace;
    }

private:
    struct Link {
        int neighbor;
        Eigen::MatrixXd gain;  // applied to the neighbour state
        Eigen::MatrixXd loss;  // applied to the own state
    };

    void build_links() {
        const int d = transforms_.d;
        links_.assign(graph_.n, {});
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
        if (cfg_.variant == ProtocolVariant::Z) {
            for (const auto& [i, j] : graph_.edges) {
                links_[i].push_back({j, transforms_.at(i, j), eye});
            }
            com_edges_ = graph_.edge_count();
        } else {
            // communication over E union reversed(E); a missing direction
            // contributes a zero block to the payloads
            std::set<Edge> com;
            for (const auto& [i, j] : graph_.edges) {
                com.insert({i, j});
                com.insert({j, i});
            }
            for (const auto& [i, j] : com) {
                Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(d, d);
                Eigen::MatrixXd loss = Eigen::MatrixXd::Zero(d, d);
                if (graph_.has_edge(i, j)) {
                    gain += transforms_.at(i, j);
                    loss += eye;
                }
                if (graph_.has_edge(j, i)) {
                    const Eigen::MatrixXd& gji = transforms_.at(j, i);
                    gain += gji.transpose();
                    loss += gji.transpose() * gji;
                }
                links_[i].push_back({j, std::move(gain), std::move(loss)});
            }
            com_edges_ = static_cast<int>(com.size());
        }
    }

    FrameGraph graph_;
    EdgeTransforms transforms_;
    ProtocolConfig cfg_;
    std::vector<std::vector<Link>> links_;
    std::vector<Eigen::MatrixXd> states_;
    int rounds_run_ = 0;
    int com_edges_ = 0;
};

}  // namespace framesync
