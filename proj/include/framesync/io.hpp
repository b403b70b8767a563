#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "framesync/instance.hpp"

namespace framesync {

// All file formats index nodes from 1.

inline nlohmann::json graph_to_json(const FrameGraph& g,
                                    const std::set<Edge>* qsc_edges = nullptr) {
    nlohmann::json out;
    out["n"] = g.n;
    auto edge_array = [](const std::set<Edge>& edges) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [i, j] : edges) arr.push_back({i + 1, j + 1});
        return arr;
    };
    out["edges"] = edge_array(g.edges);
    if (qsc_edges != nullptr) out["qsc_edges"] = edge_array(*qsc_edges);
    return out;
}

inline FrameGraph graph_from_json(const nlohmann::json& j, std::set<Edge>* qsc_edges = nullptr) {
    FrameGraph g(j.at("n").get<int>());
    for (const auto& e : j.at("edges")) {
        const int a = e.at(0).get<int>() - 1;
        const int b = e.at(1).get<int>() - 1;
        if (a < 0 || b < 0 || a >= g.n || b >= g.n) {
            throw ConfigError("graph JSON: edge endpoint out of range");
        }
        g.add_edge(a, b);
    }
    if (qsc_edges != nullptr && j.contains("qsc_edges")) {
        for (const auto& e : j.at("qsc_edges")) {
            qsc_edges->insert({e.at(0).get<int>() - 1, e.at(1).get<int>() - 1});
        }
    }
    return g;
}

inline nlohmann::json spec_to_json(const InstanceSpec& s) {
    nlohmann::json out;
    out["n"] = s.n;
    out["d"] = s.d;
    out["sigma"] = s.sigma;
    out["rho"] = s.rho;
    out["transform_class"] = to_string(s.transform_class);
    out["noise_model"] = to_string(s.noise_model);
    out["geodesic_radius"] = s.geodesic_radius;
    out["seed"] = s.seed;
    return out;
}

inline TransformClass transform_class_from_string(const std::string& s) {
    if (s == "orthogonal") return TransformClass::Orthogonal;
    if (s == "linear") return TransformClass::Linear;
    if (s == "affine") return TransformClass::Affine;
    if (s == "euclidean") return TransformClass::Euclidean;
    throw ConfigError("unknown transform class: " + s);
}

inline NoiseModel noise_model_from_string(const std::string& s) {
    if (s == "gauss-proj") return NoiseModel::GaussianProjected;
    if (s == "gauss-raw") return NoiseModel::GaussianRaw;
    if (s == "geodesic") return NoiseModel::Geodesic;
    throw ConfigError("unknown noise model: " + s);
}

inline InstanceSpec spec_from_json(const nlohmann::json& j) {
    InstanceSpec s;
    s.n = j.at("n").get<int>();
    s.d = j.at("d").get<int>();
    s.sigma = j.at("sigma").get<double>();
    s.rho = j.at("rho").get<double>();
    s.transform_class = transform_class_from_string(j.at("transform_class").get<std::string>());
    s.noise_model = noise_model_from_string(j.at("noise_model").get<std::string>());
    if (j.contains("geodesic_radius")) s.geodesic_radius = j.at("geodesic_radius").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json arr = nlohmann::json::array();  // row-major
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    }
    return arr;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr, int dim) {
    Eigen::MatrixXd m(dim, dim);
    int k = 0;
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) m(r, c) = arr.at(k++).get<double>();
    }
    return m;
}

inline std::string edge_key(const Edge& e) {
    return std::to_string(e.first + 1) + "," + std::to_string(e.second + 1);
}

}  // namespace detail

inline nlohmann::json instance_to_json(const ProblemInstance& inst) {
    nlohmann::json out;
    out["schema_version"] = 1;
    out["spec"] = spec_to_json(inst.spec);
    out["graph"] = graph_to_json(inst.graph, &inst.density.qsc_edges);
    nlohmann::json transforms;
    for (const auto& [e, m] : inst.observed.map) {
        transforms[detail::edge_key(e)] = detail::matrix_to_json(m);
    }
    out["transforms"] = transforms;
    if (!inst.ground_truth.empty()) {
        nlohmann::json gt = nlohmann::json::array();
        for (const auto& m : inst.ground_truth) gt.push_back(detail::matrix_to_json(m));
        out["ground_truth"] = gt;
    }
    return out;
}

inline ProblemInstance instance_from_json(const nlohmann::json& j) {
    ProblemInstance inst;
    inst.spec = spec_from_json(j.at("spec"));
    inst.graph = graph_from_json(j.at("graph"), &inst.density.qsc_edges);
    inst.density.rho = graph_density(inst.graph, inst.density.qsc_edges);
    const int dim = inst.spec.matrix_dim();
    inst.observed = EdgeTransforms(dim);
    for (const auto& [key, arr] : j.at("transforms").items()) {
        const auto comma = key.find(',');
        const int a = std::stoi(key.substr(0, comma)) - 1;
        const int b = std::stoi(key.substr(comma + 1)) - 1;
        inst.observed.map[{a, b}] = detail::matrix_from_json(arr, dim);
    }
    if (j.contains("ground_truth")) {
        for (const auto& arr : j.at("ground_truth")) {
            inst.ground_truth.push_back(detail::matrix_from_json(arr, dim));
        }
    }
    return inst;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SyncError("cannot open for writing: " + path);
    out << content;
}

}  // namespace framesync
