// Command-line front end: experiment sweeps, the optimality-gap
// experiment, and a quick invariant self-check.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "framesync/framesync.hpp"

namespace {

using namespace framesync;

std::string trace_to_csv(const ProtocolTrace& trace, const std::string& variant,
                         std::uint64_t seed) {
    std::string csv = "round,g_prime,max_state_norm,variant,seed\n";
    char buf[128];
    for (const auto& row : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%s,%llu\n", row.round, row.g_prime,
                      row.max_state_norm, variant.c_str(),
                      static_cast<unsigned long long>(seed));
        csv += buf;
    }
    return csv;
}

void emit_result(const ExperimentResult& result, const std::string& path,
                 const std::string& format) {
    if (format == "csv") {
        write_text_file(path, experiment_to_csv(result));
    } else {
        write_text_file(path, experiment_to_json(result).dump(2) + "\n");
    }
}

int run_verify();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synchronization of pairwise linear transformations between coordinate frames"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "run a synchronization experiment sweep");
    ExperimentOptions opts;
    std::string method = "h";
    std::string transform_class;
    std::string noise;
    std::string out_path;
    std::string format = "csv";
    std::string trace_path;
    double radius = M_PI / 4.0;
    run->add_option("--method", method, "z|h|gn|affine|euclidean|ref|dist-z|dist-h|gradflow")
        ->required();
    run->add_option("--n", opts.base.n, "number of frames");
    run->add_option("--d", opts.base.d, "matrix dimension");
    run->add_option("--sigma", opts.base.sigma, "noise standard deviation");
    run->add_option("--rho", opts.base.rho, "graph density");
    run->add_option("--trials", opts.trials, "number of independent trials");
    run->add_option("--seed", opts.master_seed, "master seed");
    run->add_option("--class", transform_class, "orthogonal|linear|affine|euclidean");
    run->add_option("--noise", noise, "gauss-proj|gauss-raw|geodesic");
    run->add_option("--radius", radius, "geodesic noise radius");
    run->add_option("--epsilon", opts.epsilon, "protocol step size");
    run->add_option("--rounds", opts.rounds, "protocol rounds");
    run->add_option("--max-iters", opts.max_iters, "refinement iterations");
    run->add_option("--threads", opts.threads, "parallel trials (0: FRAMESYNC_THREADS or 1)");
    run->add_option("--trace", trace_path, "write the first trial's protocol trace CSV here");
    run->add_option("--out", out_path, "output path")->required();
    run->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    // ---- gap ----
    auto* gap = app.add_subcommand("gap", "optimality-gap certificate experiment");
    int gap_n = 100, gap_d = 3, gap_zeros = 100, gap_trials = 50;
    std::uint64_t gap_seed = 0;
    double gap_radius = M_PI / 4.0;
    std::string gap_out, gap_format = "csv";
    gap->add_option("--n", gap_n, "number of frames");
    gap->add_option("--d", gap_d, "matrix dimension");
    gap->add_option("--radius", gap_radius, "geodesic noise radius");
    gap->add_option("--zeros", gap_zeros, "absent ordered pairs in the adjacency matrix");
    gap->add_option("--trials", gap_trials, "number of trials");
    gap->add_option("--seed", gap_seed, "master seed");
    gap->add_option("--out", gap_out, "output path")->required();
    gap->add_option("--format", gap_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run the built-in invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            opts.method = method_from_string(method);
            if (!transform_class.empty()) {
                opts.base.transform_class = transform_class_from_string(transform_class);
            } else if (opts.method == Method::Affine) {
                opts.base.transform_class = TransformClass::Affine;
            } else if (opts.method == Method::Euclidean) {
                opts.base.transform_class = TransformClass::Euclidean;
            } else if (opts.method == Method::GN) {
                opts.base.transform_class = TransformClass::Linear;
            }
            opts.base.noise_model = noise.empty()
                                        ? default_noise_model(opts.base.transform_class)
                                        : noise_model_from_string(noise);
            opts.base.geodesic_radius = radius;

            const ExperimentResult result = run_experiment(opts);
            emit_result(result, out_path, format);
            std::printf("method=%s trials=%d ok=%d mean_gprime=%.6g\n", method.c_str(),
                        opts.trials, result.g_prime.count, result.g_prime.mean);

            if (!trace_path.empty() &&
                (opts.method == Method::DistZ || opts.method == Method::DistH)) {
                InstanceSpec spec = opts.base;
                spec.seed = derive_seed(opts.master_seed, 0);
                const ProblemInstance inst = make_instance(spec);
                ProtocolConfig cfg;
                cfg.variant =
                    opts.method == Method::DistZ ? ProtocolVariant::Z : ProtocolVariant::H;
                cfg.epsilon = opts.epsilon;
                cfg.seed = spec.seed;
                Simulator sim(inst.graph, inst.observed, cfg);
                const ProtocolTrace trace = sim.run(opts.rounds);
                write_text_file(trace_path,
                                trace_to_csv(trace, method, spec.seed));
            }
        } else if (*gap) {
            ExperimentResult result;
            result.options.method = Method::H;
            result.options.trials = gap_trials;
            result.options.master_seed = gap_seed;
            result.options.base.n = gap_n;
            result.options.base.d = gap_d;
            result.options.base.sigma = 0.0;
            result.options.base.transform_class = TransformClass::Orthogonal;
            result.options.base.noise_model = NoiseModel::Geodesic;
            result.options.base.geodesic_radius = gap_radius;
            result.trials.resize(gap_trials);
            for (int trial = 0; trial < gap_trials; ++trial) {
                const std::uint64_t seed = derive_seed(gap_seed, trial);
                TrialResult& row = result.trials[trial];
                row.trial = trial;
                row.seed = seed;
                try {
                    const ProblemInstance inst =
                        make_gap_instance(gap_n, gap_d, gap_radius, gap_zeros, seed);
                    const FrameSolution raw = solve_h(inst.graph, inst.observed);
                    const FrameSolution projected = project_orthogonal(raw);
                    const GapBound bound = gap_bound(raw, projected, inst.graph, inst.observed);
                    row.gap_h = bound.h;
                    row.g_prime = metrics(inst.graph, inst.observed, projected).g_prime;
                } catch (const SyncError& e) {
                    row.status = "error";
                }
            }
            std::vector<double> gs, hs;
            for (const auto& row : result.trials) {
                if (row.status == "ok") {
                    gs.push_back(row.g_prime);
                    hs.push_back(row.gap_h);
                }
            }
            result.g_prime = detail::aggregate(gs);
            result.gap_h = detail::aggregate(hs);
            emit_result(result, gap_out, gap_format);
            std::printf("gap experiment: trials=%d mean_h=%.6g max_h=%.6g\n", gap_trials,
                        result.gap_h.mean,
                        hs.empty() ? 0.0 : *std::max_element(hs.begin(), hs.end()));
        } else if (*verify) {
            return run_verify();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

namespace {

int run_verify() {
    int failures = 0;
    const auto check = [&](const char* name, bool ok) {
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    Rng rng(7);
    // spanning-tree exactness
    {
        auto [tree, density] = generate_min_qsc(12, rng);
        EdgeTransforms t(3);
        for (const auto& [i, j] : tree.edges) t.map[{i, j}] = random_gaussian_matrix(3, 3, rng);
        const FrameSolution s = solve_z(tree, t);
        check("tree exactness (Z)", metrics(tree, t, s).g_prime <= 1e-10);
    }
    // consistent recovery and kernel dimension of H
    {
        InstanceSpec spec;
        spec.n = 12;
        spec.sigma = 0.0;
        spec.seed = 3;
        const ProblemInstance inst = make_instance(spec);
        const FrameSolution s = solve_h(inst.graph, inst.observed);
        check("consistent recovery (H)", metrics(inst.graph, inst.observed, s).g_prime <= 1e-10);
        check("kernel dimension d", kernel_dimension(build_h(inst.graph, inst.observed)) == 3);
    }
    // simulator equals the stacked linear recursion
    {
        InstanceSpec spec;
        spec.n = 8;
        spec.sigma = 0.2;
        spec.seed = 11;
        const ProblemInstance inst = make_instance(spec);
        ProtocolConfig cfg;
        cfg.variant = ProtocolVariant::H;
        cfg.seed = 5;
        Simulator sim(inst.graph, inst.observed, cfg);
        Eigen::MatrixXd x = sim.stacked();
        const Eigen::MatrixXd m = build_h(inst.graph, inst.observed).dense();
        const Eigen::MatrixXd step =
            Eigen::MatrixXd::Identity(m.rows(), m.cols()) - cfg.epsilon * m;
        for (int r = 0; r < 50; ++r) {
            sim.round();
            x = step * x;
        }
        check("simulator matches (I - eps H)^T X(0)", (sim.stacked() - x).norm() <= 1e-9);
    }
    // gradient flow tangency
    {
        InstanceSpec spec;
        spec.n = 6;
        spec.sigma = 0.2;
        spec.seed = 2;
        const ProblemInstance inst = make_instance(spec);
        std::vector<Eigen::MatrixXd> frames;
        Rng frng(1);
        for (int i = 0; i < 6; ++i) frames.push_back(random_orthogonal(3, frng));
        const auto rhs = flow_rhs(inst.graph, inst.observed, frames);
        double worst = 0.0;
        for (int i = 0; i < 6; ++i) {
            const Eigen::MatrixXd s = frames[i].transpose() * rhs[i];
            worst = std::max(worst, (s + s.transpose()).norm());
        }
        check("flow tangency", worst <= 1e-10);
    }
    // affine decomposition identity
    {
        InstanceSpec spec;
        spec.n = 8;
        spec.sigma = 0.2;
        spec.transform_class = TransformClass::Affine;
        spec.noise_model = NoiseModel::GaussianRaw;
        spec.seed = 9;
        const ProblemInstance inst = make_instance(spec);
        Rng arng(4);
        std::vector<Eigen::MatrixXd> hom(8);
        EdgeTransforms q_obs(3);
        std::map<Edge, Eigen::VectorXd> t_obs;
        std::vector<Eigen::MatrixXd> qs(8);
        for (int i = 0; i < 8; ++i) {
            Eigen::VectorXd tv(3);
            for (int k = 0; k < 3; ++k) tv(k) = arng.uniform(-2.0, 2.0);
            qs[i] = random_orthogonal(3, arng) + 0.1 * random_gaussian_matrix(3, 3, arng);
            hom[i] = AffineTransform{qs[i], tv}.homogeneous();
        }
        double g_hom = 0.0, g_q = 0.0, g_t = 0.0;
        for (const auto& [i, j] : inst.graph.edges) {
            const AffineTransform obs = split_homogeneous(inst.observed.at(i, j));
            const Eigen::MatrixXd rel = hom[i].inverse() * hom[j];
            g_hom += 0.5 * (inst.observed.at(i, j) - rel).squaredNorm();
            g_q += 0.5 * (obs.q - qs[i].inverse() * qs[j]).squaredNorm();
            const Eigen::VectorXd ti = hom[i].topRightCorner(3, 1);
            const Eigen::VectorXd tj = hom[j].topRightCorner(3, 1);
            g_t += 0.5 * (obs.t - qs[i].inverse() * (tj - ti)).squaredNorm();
        }
        check("affine decomposition identity",
              std::abs(g_hom - (g_q + g_t)) <= 1e-8 * std::max(1.0, g_hom));
    }
    std::printf("%s\n", failures == 0 ? "all invariants hold" : "invariant failures detected");
    return failures == 0 ? 0 : 1;
}

}  // namespace
