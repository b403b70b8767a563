#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "framesync/errors.hpp"
#include "framesync/rng.hpp"

namespace framesync {

using Edge = std::pair<int, int>;

// Directed graph over n frames. Nodes are 0-based internally; all file
// formats and documentation use 1-based ids. Self-loops are never stored:
// a transform from a frame to itself is the identity and contributes
// nothing to any residual or matrix built here.
struct FrameGraph {
    int n = 0;
    std::set<Edge> edges;  // ordered (i, j), i != j

    FrameGraph() = default;
    explicit FrameGraph(int node_count) : n(node_count) {}

    void add_edge(int i, int j) {
        if (i == j) return;
        edges.insert({i, j});
    }

    bool has_edge(int i, int j) const { return edges.count({i, j}) > 0; }

    int edge_count() const { return static_cast<int>(edges.size()); }

    bool is_complete() const {
        return edge_count() == n * (n - 1);
    }

    // Out-neighbour lists: j in result[i] iff (i, j) is an edge.
    std::vector<std::vector<int>> out_lists() const {
        std::vector<std::vector<int>> out(n);
        for (const auto& [i, j] : edges) out[i].push_back(j);
        return out;
    }

    std::vector<std::vector<int>> in_lists() const {
        std::vector<std::vector<int>> in(n);
        for (const auto& [i, j] : edges) in[j].push_back(i);
        return in;
    }
};

// Graph with the edge directions reversed.
inline FrameGraph reverse(const FrameGraph& g) {
    FrameGraph r(g.n);
    for (const auto& [i, j] : g.edges) r.edges.insert({j, i});
    return r;
}

inline Eigen::MatrixXd adjacency(const FrameGraph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [i, j] : g.edges) a(i, j) = 1.0;
    return a;
}

// L = diag(A 1) - A. Rows sum to zero, diagonal holds out-degrees.
inline Eigen::MatrixXd laplacian(const FrameGraph& g) {
    Eigen::MatrixXd a = adjacency(g);
    Eigen::MatrixXd l = -a;
    l.diagonal() += a.rowwise().sum();
    return l;
}

// Connectivity of the undirected version (edge directions ignored).
inline bool is_connected(const FrameGraph& g) {
    if (g.n <= 1) return true;
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& [i, j] : g.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<char> seen(g.n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == g.n;
}

// Centers: nodes reachable from every other node by a directed path.
// Computed by reachability on the reversed graph from each candidate.
inline std::vector<int> find_centers(const FrameGraph& g) {
    std::vector<std::vector<int>> radj(g.n);
    for (const auto& [i, j] : g.edges) radj[j].push_back(i);
    std::vector<int> centers;
    std::vector<char> seen(g.n, 0);
    std::vector<int> stack;
    for (int c = 0; c < g.n; ++c) {
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(1, c);
        seen[c] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : radj[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        if (count == g.n) centers.push_back(c);
    }
    return centers;
}

inline bool is_qsc(const FrameGraph& g) { return !find_centers(g).empty(); }

// Graph density: fraction of optional edges present beyond the embedded
// spanning tree. The denominator keeps the printed n^2 convention, so the
// formula alone never reaches 1; a complete graph is reported as 1.
struct GraphDensity {
    double rho = 0.0;
    std::set<Edge> qsc_edges;
};

inline double graph_density(const FrameGraph& g, const std::set<Edge>& qsc_edges) {
    if (g.n <= 1) return 0.0;
    if (g.is_complete()) return 1.0;
    int extra = 0;
    for (const auto& e : g.edges) {
        if (!qsc_edges.count(e)) ++extra;
    }
    const double denom =
        static_cast<double>(g.n) * g.n - static_cast<double>(qsc_edges.size());
    return denom > 0.0 ? extra / denom : 0.0;
}

// Random spanning tree on n nodes, every edge directed toward a node that
// is already attached; the random root is a center of the result.
inline std::pair<FrameGraph, GraphDensity> generate_min_qsc(int n, Rng& rng) {
    FrameGraph g(n);
    std::vector<int> attached;
    std::vector<int> pending(n);
    for (int i = 0; i < n; ++i) pending[i] = i;
    const int root_pos = rng.uniform_int(0, n - 1);
    attached.push_back(pending[root_pos]);
    pending.erase(pending.begin() + root_pos);
    while (!pending.empty()) {
        const int ip = rng.uniform_int(0, static_cast<int>(pending.size()) - 1);
        const int jp = rng.uniform_int(0, static_cast<int>(attached.size()) - 1);
        const int i = pending[ip];
        const int j = attached[jp];
        g.add_edge(i, j);
        attached.push_back(i);
        pending.erase(pending.begin() + ip);
    }
    GraphDensity density;
    density.qsc_edges = g.edges;
    density.rho = graph_density(g, density.qsc_edges);
    return {g, density};
}

// Adds uniformly random absent edges until the density reaches target_rho.
// Monotone: the input edge set (and its embedded tree) is always kept.
inline FrameGraph densify(const FrameGraph& g, const std::set<Edge>& qsc_edges,
                          double target_rho, Rng& rng) {
    FrameGraph out = g;
    std::vector<Edge> absent;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            if (i != j && !out.has_edge(i, j)) absent.push_back({i, j});
        }
    }
    while (graph_density(out, qsc_edges) < target_rho && !absent.empty()) {
        const int pick = rng.uniform_int(0, static_cast<int>(absent.size()) - 1);
        out.edges.insert(absent[pick]);
        absent.erase(absent.begin() + pick);
    }
    return out;
}

// Random spanning tree drawn from the edges of a QSC graph, grown backward
// from a randomly chosen center: repeatedly pick an attached node r and an
// unattached in-neighbour r' of r, and take the edge (r', r).
inline FrameGraph random_min_qsc_subgraph(const FrameGraph& g, Rng& rng) {
    const std::vector<int> centers = find_centers(g);
    if (centers.empty()) {
        throw NonQscGraph("random_min_qsc_subgraph: graph is not quasi-strongly connected");
    }
    FrameGraph tree(g.n);
    const int center = centers[rng.uniform_int(0, static_cast<int>(centers.size()) - 1)];
    std::vector<std::vector<int>> in = g.in_lists();
    std::vector<char> attached(g.n, 0);
    std::vector<int> attached_list = {center};
    attached[center] = 1;
    while (tree.edge_count() < g.n - 1) {
        const int r =
            attached_list[rng.uniform_int(0, static_cast<int>(attached_list.size()) - 1)];
        std::vector<int> fresh;
        for (int v : in[r]) {
            if (!attached[v]) fresh.push_back(v);
        }
        if (fresh.empty()) continue;  // some other attached node can grow
        const int rp = fresh[rng.uniform_int(0, static_cast<int>(fresh.size()) - 1)];
        tree.add_edge(rp, r);
        attached[rp] = 1;
        attached_list.push_back(rp);
    }
    return tree;
}

}  // namespace framesync
