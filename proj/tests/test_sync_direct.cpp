#include <catch2/catch_amalgamated.hpp>

#include "framesync/sync_direct.hpp"
#include "test_util.hpp"

using namespace framesync;
using namespace framesync::testutil;

TEST_CASE("Z method: spanning-tree exactness") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto [tree, density] = generate_min_qsc(12, rng);
        EdgeTransforms t(3);
        for (const auto& [i, j] : tree.edges) t.set(i, j, random_gaussian_matrix(3, 3, rng));
        const FrameSolution s = solve_z(tree, t);
        const SyncReport r = metrics(tree, t, s);
        CHECK(r.g_prime <= 1e-10);
        for (const auto& [i, j] : tree.edges) {
            CHECK((s.pairwise(i, j) - t.at(i, j)).norm() <= 1e-8 * t.at(i, j).norm());
        }
    }
}

TEST_CASE("Z method: consistent recovery on any QSC graph") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const FrameGraph g = random_qsc_graph(10, rng.uniform(), rng);
        const auto frames = invertible_frames(10, 3, rng);
        const EdgeTransforms t = pairwise_from_frames(g, frames);
        const FrameSolution s = solve_z(g, t);
        for (const auto& [i, j] : g.edges) {
            CHECK((s.pairwise(i, j) - t.at(i, j)).norm() <= 1e-8);
        }
    }
}

TEST_CASE("Z method: adversarial scaling keeps the consistent kernel") {
    Rng rng(23);
    const FrameGraph g = random_qsc_graph(8, 0.5, rng);
    const auto frames = invertible_frames(8, 3, rng);
    const EdgeTransforms consistent = pairwise_from_frames(g, frames);

    std::vector<std::vector<int>> out = g.out_lists();
    int hub = -1;
    for (int i = 0; i < g.n; ++i) {
        if (out[i].size() >= 2) hub = i;
    }
    REQUIRE(hub >= 0);
    EdgeTransforms observed = consistent;
    const double alpha = 0.1;
    observed.map[{hub, out[hub][0]}] *= 1.0 + alpha;
    observed.map[{hub, out[hub][1]}] *= 1.0 - alpha;

    const FrameSolution s = solve_z(g, observed);
    // the solver reproduces the unperturbed consistent set ...
    for (const auto& [i, j] : g.edges) {
        CHECK((s.pairwise(i, j) - consistent.at(i, j)).norm() <= 1e-7);
    }
    // ... so the residual against the observed set is strictly positive
    CHECK(metrics(g, observed, s).g_prime > 1e-4);
}

TEST_CASE("Z method requires a QSC graph") {
    EdgeTransforms t(2);
    const FrameGraph star = out_star(4);
    for (const auto& [i, j] : star.edges) t.set(i, j, Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(solve_z(star, t), NonQscGraph);
    // while the H method handles it
    CHECK_NOTHROW(solve_h(star, t));
}

TEST_CASE("H method: consistent recovery on connected graphs") {
    Rng rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        FrameGraph g = out_star(9);  // connected, not QSC
        for (int e = 0; e < 6; ++e) {
            g.add_edge(rng.uniform_int(1, 8), rng.uniform_int(1, 8));
        }
        const auto frames = invertible_frames(9, 3, rng);
        const EdgeTransforms t = pairwise_from_frames(g, frames);
        CHECK(kernel_dimension(build_h(g, t)) == 3);
        const FrameSolution s = solve_h(g, t);
        for (const auto& [i, j] : g.edges) {
            CHECK((s.pairwise(i, j) - t.at(i, j)).norm() <= 1e-8);
        }
    }
    CHECK_THROWS_AS(solve_h(FrameGraph(3), EdgeTransforms(2)), DisconnectedGraph);
}

TEST_CASE("H at least as good as Z on noisy orthogonal instances") {
    double z_total = 0.0, h_total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        InstanceSpec spec;
        spec.n = 12;
        spec.sigma = 0.3;
        spec.rho = 0.5;
        spec.seed = 900 + seed;
        const ProblemInstance inst = make_instance(spec);
        z_total +=
            metrics(inst.graph, inst.observed, project_orthogonal(solve_z(inst.graph, inst.observed)))
                .g_prime;
        h_total +=
            metrics(inst.graph, inst.observed, project_orthogonal(solve_h(inst.graph, inst.observed)))
                .g_prime;
    }
    CHECK(h_total <= z_total + 1e-9);
}

TEST_CASE("singular extracted blocks are rejected") {
    // zero transforms make Z diagonal, so the extracted subspace is a
    // coordinate selection whose blocks cannot all be invertible
    const FrameGraph g = complete_graph(3);
    EdgeTransforms t(2);
    for (const auto& [i, j] : g.edges) t.set(i, j, Eigen::MatrixXd::Zero(2, 2));
    CHECK_THROWS_AS(solve_z(g, t), SingularBlock);
}

TEST_CASE("orthogonal projection") {
    Rng rng(25);
    const Eigen::MatrixXd q = random_orthogonal(3, rng);
    CHECK((orthogonal_polar_factor(q) - q).norm() <= 1e-12);

    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
    diag(0, 0) = 2.0;
    diag(1, 1) = 0.5;
    CHECK((orthogonal_polar_factor(diag) - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-14);

    // matches the polar factor computed through the normal equations
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd m = random_gaussian_matrix(3, 3, rng);
        if (m.determinant() < 0) m.row(0) *= -1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * m);
        const Eigen::MatrixXd oracle = m * eig.operatorInverseSqrt();
        CHECK((orthogonal_polar_factor(m) - oracle).norm() <= 1e-9);
    }

    // FrameSolution-level projection postcondition
    InstanceSpec spec;
    spec.n = 8;
    spec.sigma = 0.3;
    spec.seed = 5;
    const ProblemInstance inst = make_instance(spec);
    const FrameSolution proj = project_orthogonal(solve_h(inst.graph, inst.observed));
    for (const auto& f : proj.frames) {
        CHECK((f.transpose() * f - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-10);
    }
}

TEST_CASE("gap bound") {
    // consistent input: f = 0, exactness flag
    Rng rng(26);
    const FrameGraph g = random_qsc_graph(8, 0.6, rng);
    const auto frames = orthogonal_frames(8, 3, rng);
    const EdgeTransforms t = pairwise_from_frames(g, frames);
    const FrameSolution raw = solve_h(g, t);
    const GapBound exact = gap_bound(raw, project_orthogonal(raw), g, t);
    CHECK(exact.exact);
    CHECK(exact.h == 0.0);

    // noisy orthogonal runs: bound nonnegative (Prop. 3 lower bound)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        InstanceSpec spec;
        spec.n = 10;
        spec.sigma = 0.4;
        spec.seed = 70 + seed;
        const ProblemInstance inst = make_instance(spec);
        const FrameSolution u = solve_h(inst.graph, inst.observed);
        const GapBound b = gap_bound(u, project_orthogonal(u), inst.graph, inst.observed);
        CHECK(b.h >= -1e-9);
    }

    // homogeneity f(sqrt(n) X) = n f(X) for random stacks
    const auto rnd_frames = invertible_frames(8, 3, rng);
    std::vector<Eigen::MatrixXd> inv, scaled;
    for (const auto& f : rnd_frames) {
        inv.push_back(f.inverse());
        scaled.push_back(std::sqrt(8.0) * f.inverse());
    }
    const double f1 = f_of_inverses(g, t, scaled);
    const double f2 = 8.0 * f_of_inverses(g, t, inv);
    CHECK(std::abs(f1 - f2) <= 1e-10 * std::max(f1, 1.0));
}

TEST_CASE("Q independence of (P3)") {
    Rng rng(27);
    const int d = 3;
    InstanceSpec spec;
    spec.n = 9;
    spec.sigma = 0.2;
    spec.seed = 31;
    const ProblemInstance inst = make_instance(spec);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);

    CHECK(q_independence_check(inst.graph, inst.observed, eye, eye));
    CHECK(q_independence_check(inst.graph, inst.observed, eye, 9.0 * eye));

    const Eigen::MatrixXd a = random_gaussian_matrix(d, d, rng);
    const Eigen::MatrixXd spd = a * a.transpose() + eye;
    CHECK(q_independence_check(inst.graph, inst.observed, eye, spd));

    // consistent instance: both objectives vanish
    InstanceSpec clean = spec;
    clean.sigma = 0.0;
    const ProblemInstance cinst = make_instance(clean);
    const FrameSolution s = solve_p3(cinst.graph, cinst.observed, 4.0 * eye);
    CHECK(metrics(cinst.graph, cinst.observed, s).g_total <= 1e-14);
}

TEST_CASE("reference baseline") {
    Rng rng(28);
    const FrameGraph g = random_qsc_graph(10, 0.5, rng);
    const auto frames = orthogonal_frames(10, 3, rng);
    const EdgeTransforms t = pairwise_from_frames(g, frames);

    // consistent inputs: exact recovery by tree propagation
    Rng ref_rng(1);
    const FrameSolution s = reference_baseline(g, t, ref_rng);
    CHECK(metrics(g, t, s).g_prime <= 1e-20);

    // a numerically singular tree edge is reported
    EdgeTransforms broken = t;
    Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
    for (auto& [e, m] : broken.map) m = singular;  // every tree hits one
    Rng ref_rng2(2);
    CHECK_THROWS_AS(reference_baseline(g, broken, ref_rng2), SingularEdgeMatrix);
}

TEST_CASE("metrics") {
    Rng rng(29);
    // consistent inputs with their own frames: all metrics vanish
    const FrameGraph g = random_qsc_graph(6, 0.5, rng);
    const auto frames = invertible_frames(6, 3, rng);
    const EdgeTransforms t = pairwise_from_frames(g, frames);
    FrameSolution s;
    s.d = 3;
    s.frames = frames;
    const SyncReport clean = metrics(g, t, s);
    CHECK(clean.g_total <= 1e-20);
    CHECK(clean.g_prime <= 1e-20);
    CHECK(clean.f_value <= 1e-20);

    // single edge, G12 = 2I, frames = I: g = 1, g' = 2
    FrameGraph single(2);
    single.add_edge(0, 1);
    EdgeTransforms two(2);
    two.set(0, 1, 2.0 * Eigen::MatrixXd::Identity(2, 2));
    FrameSolution ident;
    ident.d = 2;
    ident.frames = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    const SyncReport hand = metrics(single, two, ident);
    CHECK(hand.g_total == Catch::Approx(1.0));
    CHECK(hand.g_prime == Catch::Approx(2.0));

    // orthogonal frames: f and g agree
    InstanceSpec spec;
    spec.n = 8;
    spec.sigma = 0.3;
    spec.seed = 77;
    const ProblemInstance inst = make_instance(spec);
    FrameSolution orth;
    orth.d = 3;
    Rng orng(3);
    orth.frames = orthogonal_frames(8, 3, orng);
    const SyncReport r = metrics(inst.graph, inst.observed, orth);
    CHECK(std::abs(r.g_total - r.f_value) <= 1e-10 * std::max(r.g_total, 1.0));
}

TEST_CASE("metrics are invariant under a global left multiplier") {
    Rng rng(30);
    InstanceSpec spec;
    spec.n = 7;
    spec.sigma = 0.2;
    spec.seed = 13;
    const ProblemInstance inst = make_instance(spec);
    const FrameSolution s = solve_h(inst.graph, inst.observed);
    const SyncReport base = metrics(inst.graph, inst.observed, s);

    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd q = random_gaussian_matrix(3, 3, rng);
        while (condition_number(q) > 1e3) q = random_gaussian_matrix(3, 3, rng);
        FrameSolution shifted = s;
        for (auto& f : shifted.frames) f = q * f;
        const SyncReport moved = metrics(inst.graph, inst.observed, shifted);
        CHECK(moved.g_total == Catch::Approx(base.g_total).epsilon(1e-9));
        CHECK(moved.g_prime == Catch::Approx(base.g_prime).epsilon(1e-9));
        CHECK(left_equivalent(s, shifted, 1e-8));
    }
}

TEST_CASE("subspace varies continuously with the transforms") {
    Rng rng(31);
    const FrameGraph g = random_qsc_graph(8, 0.5, rng);
    const auto frames = invertible_frames(8, 3, rng);
    const EdgeTransforms consistent = pairwise_from_frames(g, frames);
    const Eigen::MatrixXd v_base = smallest_singular_subspace(build_z(g, consistent), 3);
    const Eigen::MatrixXd p_base = v_base * v_base.transpose();

    double prev = 1.0;
    for (double scale : {1e-3, 1e-4, 1e-5, 1e-6}) {
        EdgeTransforms perturbed = consistent;
        Rng prng(55);
        double total = 0.0;
        for (auto& [e, m] : perturbed.map) {
            const Eigen::MatrixXd delta = random_gaussian_matrix(3, 3, prng);
            const Eigen::MatrixXd scaled = delta / delta.norm();
            m += scale / std::sqrt(static_cast<double>(perturbed.map.size())) * scaled;
            total += scaled.squaredNorm();
        }
        const Eigen::MatrixXd v = smallest_singular_subspace(build_z(g, perturbed), 3);
        const double dist = (v * v.transpose() - p_base).norm();
        if (scale == 1e-6) CHECK(dist <= 1e-3);
        CHECK(dist <= prev * 1.5);  // monotone trend over the decades
        prev = dist;
    }
}

TEST_CASE("sampling cannot beat the certified pipeline") {
    InstanceSpec spec;
    spec.n = 3;
    spec.d = 2;
    spec.rho = 1.0;
    spec.sigma = 0.4;
    spec.seed = 8;
    const ProblemInstance inst = make_instance(spec);
    const FrameSolution raw = solve_h(inst.graph, inst.observed);
    const FrameSolution proj = project_orthogonal(raw);
    const GapBound bound = gap_bound(raw, proj, inst.graph, inst.observed);
    const double g_star = metrics(inst.graph, inst.observed, proj).g_total;

    Rng rng(32);
    double best = std::numeric_limits<double>::infinity();
    FrameSolution sample;
    sample.d = 2;
    sample.frames.resize(3);
    for (int trial = 0; trial < 10000; ++trial) {
        for (auto& f : sample.frames) f = random_orthogonal(2, rng);
        best = std::min(best, metrics(inst.graph, inst.observed, sample).g_total);
    }
    CHECK(g_star <= (1.0 + bound.h) * best + 1e-9);
}
