#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "framesync/distributed.hpp"
#include "framesync/gauss_newton.hpp"
#include "framesync/gradient_flow.hpp"
#include "framesync/instance.hpp"
#include "framesync/io.hpp"

namespace framesync {

enum class Method { Z, H, GN, Affine, Euclidean, Ref, DistZ, DistH, GradFlow };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Z: return "z";
        case Method::H: return "h";
        case Method::GN: return "gn";
        case Method::Affine: return "affine";
        case Method::Euclidean: return "euclidean";
        case Method::Ref: return "ref";
        case Method::DistZ: return "dist-z";
        case Method::DistH: return "dist-h";
        case Method::GradFlow: return "gradflow";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    for (Method m : {Method::Z, Method::H, Method::GN, Method::Affine, Method::Euclidean,
                     Method::Ref, Method::DistZ, Method::DistH, Method::GradFlow}) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("unknown method: " + s);
}

struct ExperimentOptions {
    Method method = Method::H;
    InstanceSpec base;       // per-trial seed is derived, the one here is ignored
    int trials = 100;
    std::uint64_t master_seed = 0;
    // method-specific knobs
    double epsilon = 0.01;
    int rounds = 5000;
    int max_iters = 5;
    double flow_horizon = 10.0;
    double flow_step = 0.01;
    int threads = 0;         // 0: FRAMESYNC_THREADS env or 1
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    double g_prime = 0.0;
    double gap_h = -1.0;     // < 0: not applicable
    std::string status = "ok";
    double runtime_ms = 0.0;
};

struct Aggregate {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    int count = 0;
};

struct ExperimentResult {
    ExperimentOptions options;
    std::vector<TrialResult> trials;
    Aggregate g_prime;
    Aggregate gap_h;
    double runtime_ms = 0.0;
};

namespace detail {

inline Aggregate aggregate(std::vector<double> values) {
    Aggregate a;
    a.count = static_cast<int>(values.size());
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / a.count;
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.stddev = a.count > 1 ? std::sqrt(sq / (a.count - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    a.median = a.count % 2 == 1 ? values[a.count / 2]
                                : 0.5 * (values[a.count / 2 - 1] + values[a.count / 2]);
    return a;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRAMESYNC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

// One synchronization run on an already generated instance.
inline TrialResult run_single(const ProblemInstance& inst, const ExperimentOptions& opts,
                              std::uint64_t trial_seed) {
    TrialResult out;
    out.seed = trial_seed;
    const bool orthogonal = inst.spec.transform_class == TransformClass::Orthogonal;
    const FrameGraph& g = inst.graph;
    const EdgeTransforms& t = inst.observed;

    const auto finish = [&](const FrameSolution& s) {
        out.g_prime = metrics(g, t, s).g_prime;
    };
    const auto finish_with_gap = [&](const FrameSolution& projected) {
        // the gap bound always comes from the H relaxation
        const GapBound gap = gap_bound(solve_h(g, t), projected, g, t);
        out.gap_h = gap.h;
        finish(projected);
    };

    switch (opts.method) {
        case Method::Z: {
            const FrameSolution s = solve_z(g, t);
            if (orthogonal) {
                finish_with_gap(project_orthogonal(s));
            } else {
                finish(s);
            }
            break;
        }
        case Method::H: {
            const FrameSolution s = solve_h(g, t);
            if (orthogonal) {
                finish_with_gap(project_orthogonal(s));
            } else {
                finish(s);
            }
            break;
        }
        case Method::GN: {
            GNOptions gn;
            gn.max_iters = opts.max_iters;
            const auto [s, state] = run_gn(g, t, solve_h(g, t), gn);
            finish(s);
            break;
        }
        case Method::Ref: {
            Rng rng(derive_seed(trial_seed, 0x7ef));
            finish(reference_baseline(g, t, rng));
            break;
        }
        case Method::Affine: {
            AffineOptions ao;
            ao.max_iters = opts.max_iters;
            finish(run_affine(g, t, ao));
            break;
        }
        case Method::Euclidean: {
            AffineOptions ao;
            ao.max_iters = opts.max_iters;
            finish(run_euclidean(g, t, ao));
            break;
        }
        case Method::DistZ:
        case Method::DistH: {
            ProtocolConfig cfg;
            cfg.variant = opts.method == Method::DistZ ? ProtocolVariant::Z : ProtocolVariant::H;
            cfg.epsilon = opts.epsilon;
            cfg.seed = trial_seed;
            cfg.project_on_finalize = orthogonal;
            Simulator sim(g, t, cfg);
            for (int r = 0; r < opts.rounds; ++r) sim.round();
            const FrameSolution s = sim.finalize();
            if (orthogonal) {
                finish_with_gap(s);
            } else {
                finish(s);
            }
            break;
        }
        case Method::GradFlow: {
            FlowOptions fo;
            fo.horizon = opts.flow_horizon;
            fo.step = opts.flow_step;
            const auto [s, report] = run_algorithm8(g, t, fo);
            out.gap_h = report.gap_h;
            out.g_prime = report.g_prime;
            break;
        }
    }
    return out;
}

inline std::string status_of(const SyncError& e) {
    if (dynamic_cast<const SingularBlock*>(&e)) return "singular_block";
    if (dynamic_cast<const SingularEdgeMatrix*>(&e)) return "singular_edge";
    if (dynamic_cast<const NonQscGraph*>(&e)) return "non_qsc";
    if (dynamic_cast<const DisconnectedGraph*>(&e)) return "disconnected";
    if (dynamic_cast<const SolverError*>(&e)) return "solver_error";
    return "error";
}

}  // namespace detail

// Runs `trials` independent synchronizations with per-trial seeds derived
// from the master seed. Failures are recorded in the status column and
// excluded from the aggregates, never averaged in. Trials may run on
// FRAMESYNC_THREADS threads; output order is by trial index either way.
inline ExperimentResult run_experiment(const ExperimentOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult result;
    result.options = opts;
    result.trials.resize(opts.trials);

    const auto run_trial = [&](int trial) {
        const std::uint64_t seed = derive_seed(opts.master_seed, trial);
        const auto trial_start = std::chrono::steady_clock::now();
        TrialResult row;
        try {
            InstanceSpec spec = opts.base;
            spec.seed = seed;
            const ProblemInstance inst = make_instance(spec);
            row = detail::run_single(inst, opts, seed);
        } catch (const SyncError& e) {
            row.status = detail::status_of(e);
            row.seed = seed;
        }
        row.trial = trial;
        row.runtime_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - trial_start)
                             .count();
        result.trials[trial] = row;
    };

    const int threads = detail::resolve_threads(opts.threads);
    if (threads <= 1) {
        for (int trial = 0; trial < opts.trials; ++trial) run_trial(trial);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (int trial = next.fetch_add(1); trial < opts.trials;
                     trial = next.fetch_add(1)) {
                    run_trial(trial);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<double> g_values, h_values;
    for (const auto& row : result.trials) {
        if (row.status != "ok") continue;
        g_values.push_back(row.g_prime);
        if (row.gap_h >= 0.0) h_values.push_back(row.gap_h);
    }
    result.g_prime = detail::aggregate(std::move(g_values));
    result.gap_h = detail::aggregate(std::move(h_values));
    result.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// --- serialization -------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string experiment_to_csv(const ExperimentResult& r) {
    std::string csv = "trial,seed,method,n,d,sigma,rho,g_prime,h,status,runtime_ms\n";
    const std::string method = to_string(r.options.method);
    const InstanceSpec& b = r.options.base;
    const std::string shared = method + "," + std::to_string(b.n) + "," + std::to_string(b.d) +
                               "," + detail::fmt_double(b.sigma) + "," +
                               detail::fmt_double(b.rho);
    for (const auto& row : r.trials) {
        csv += std::to_string(row.trial) + "," + std::to_string(row.seed) + "," + shared + ",";
        csv += row.status == "ok" ? detail::fmt_double(row.g_prime) : "";
        csv += ",";
        csv += (row.status == "ok" && row.gap_h >= 0.0) ? detail::fmt_double(row.gap_h) : "";
        csv += "," + row.status + "," + detail::fmt_double(row.runtime_ms) + "\n";
    }
    if (r.trials.empty()) return csv;
    const auto aggregate_row = [&](const char* name, double gv, double hv) {
        std::string line = std::string(name) + ",," + shared + ",";
        line += r.g_prime.count > 0 ? detail::fmt_double(gv) : "";
        line += ",";
        line += r.gap_h.count > 0 ? detail::fmt_double(hv) : "";
        line += ",aggregate," + detail::fmt_double(r.runtime_ms) + "\n";
        return line;
    };
    csv += aggregate_row("mean", r.g_prime.mean, r.gap_h.mean);
    csv += aggregate_row("median", r.g_prime.median, r.gap_h.median);
    csv += aggregate_row("std", r.g_prime.stddev, r.gap_h.stddev);
    return csv;
}

inline nlohmann::json aggregate_to_json(const Aggregate& a) {
    return {{"mean", a.mean}, {"median", a.median}, {"std", a.stddev}, {"count", a.count}};
}

inline nlohmann::json experiment_to_json(const ExperimentResult& r) {
    nlohmann::json out;
    out["schema_version"] = 1;
    nlohmann::json cfg = spec_to_json(r.options.base);
    cfg.erase("seed");
    cfg["method"] = to_string(r.options.method);
    cfg["trials"] = r.options.trials;
    cfg["master_seed"] = r.options.master_seed;
    cfg["epsilon"] = r.options.epsilon;
    cfg["rounds"] = r.options.rounds;
    cfg["max_iters"] = r.options.max_iters;
    out["config"] = cfg;
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& row : r.trials) {
        nlohmann::json j;
        j["trial"] = row.trial;
        j["seed"] = row.seed;
        j["status"] = row.status;
        if (row.status == "ok") j["g_prime"] = row.g_prime;
        if (row.status == "ok" && row.gap_h >= 0.0) j["h"] = row.gap_h;
        j["runtime_ms"] = row.runtime_ms;
        trials.push_back(j);
    }
    out["trials"] = trials;
    out["aggregates"] = {{"g_prime", aggregate_to_json(r.g_prime)},
                         {"h", aggregate_to_json(r.gap_h)}};
    out["runtime_ms"] = r.runtime_ms;
    return out;
}

}  // namespace framesync
