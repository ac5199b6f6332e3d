#include <doctest.h>

#include <cmath>
#include <random>

#include "cmf/data_term.hpp"
#include "cmf/solver_al.hpp"
#include "test_util.hpp"

using namespace cmf;

namespace {

// Backward-difference divergence written out from voxel coordinates.
CyclicField naive_divergence(const FlowField& q) {
    const auto& g = q.grid();
    const std::size_t nt = g.n_theta();
    CyclicField d(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        const auto x = testing::coords(g, v);
        for (std::size_t k = 0; k < nt; ++k) {
            double s = 0.0;
            for (std::size_t a = 0; a < g.num_axes(); ++a) {
                const auto stride = g.voxel_stride(a);
                if (x[a] + 1 < g.spatial_dims()[a]) s += q.component(a)[g.node(v, k)];
                if (x[a] > 0) s -= q.component(a)[g.node(v - stride, k)];
            }
            const auto& qt = q.component(g.num_axes());
            s += qt[g.node(v, k)] - qt[g.node(v, (k + nt - 1) % nt)];
            d.at(v, k) = s;
        }
    }
    return d;
}

SolverConfig tight(int iters, double tol = 0.0) {
    SolverConfig cfg = SolverConfig::al_defaults();
    cfg.max_iters = iters;
    cfg.tolerance = tol;
    return cfg;
}

} // namespace

TEST_CASE("initial AL state") {
    const auto g = make_grid({2}, 3);
    CyclicField D(g, std::vector<double>{3, 1, 2, 0.5, 0.7, 0.6});
    const auto s = ALState::initial(D);
    CHECK(s.u == uniform_indicator(g));
    CHECK(s.p_source[0] == 1.0);
    CHECK(s.p_source[1] == 0.5);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(s.p_sink.at(0, k) == 1.0);
        CHECK(s.p_sink.at(1, k) == 0.5);
    }
    CHECK(s.q == FlowField(g));
}

TEST_CASE("residual G against a hand-written divergence") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        const auto g = testing::random_grid(rng);
        ALState s{testing::random_cyclic(g, rng), testing::random_cyclic(g, rng), SpatialField(g),
                  testing::random_flow(g, rng)};
        for (auto& x : s.p_source.values()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
        const auto G = residual_G(s);
        const auto d = naive_divergence(s.q);
        for (std::size_t v = 0; v < g.num_voxels(); ++v)
            for (std::size_t k = 0; k < g.n_theta(); ++k)
                CHECK(G.at(v, k) == doctest::Approx(d.at(v, k) + s.p_sink.at(v, k) - s.p_source[v]).epsilon(1e-13));
    }
}

TEST_CASE("step matches the scalar recurrence when S = 0") {
    // With zero capacity q stays 0 and every voxel runs the same scalar
    // updates independently.
    const auto g = make_grid({2}, 5);
    CyclicField D(g, std::vector<double>{0.9, 0.2, 0.4, 1.3, 0.8, 0.0, 0.3, 0.3, 2.0, 0.1});
    const CyclicField S(g, 0.0);
    const auto cfg = SolverConfig::al_defaults();
    const double c = cfg.c, dt = g.delta_theta();

    ALState st = ALState::initial(D);
    ALWorkspace ws(g);
    std::vector<double> u(10, 1.0 / kTwoPi), ps(10), src(2);
    for (std::size_t v = 0; v < 2; ++v) {
        src[v] = st.p_source[v];
        for (std::size_t k = 0; k < 5; ++k) ps[v * 5 + k] = src[v];
    }
    for (int it = 0; it < 300; ++it) {
        al_step_inplace(st, ws, D, S, cfg);
        for (std::size_t v = 0; v < 2; ++v) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
                const std::size_t n = v * 5 + k;
                ps[n] = std::min(D[n], src[v] + u[n] / c);
                acc += ps[n] - u[n] / c;
            }
            src[v] = (1.0 / c + acc * dt) / kTwoPi;
            for (std::size_t k = 0; k < 5; ++k) u[v * 5 + k] -= c * (ps[v * 5 + k] - src[v]);
        }
        for (std::size_t n = 0; n < 10; ++n) {
            REQUIRE(st.u[n] == doctest::Approx(u[n]).epsilon(1e-11).scale(1.0));
            REQUIRE(st.p_sink[n] == doctest::Approx(ps[n]).epsilon(1e-11).scale(1.0));
        }
        CHECK(st.q == FlowField(g));
    }
    // the fixed point is the indicator of the cheapest bin
    const double h = 1.0 / dt;
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(st.u.at(0, k) == doctest::Approx(k == 1 ? h : 0.0).scale(1.0).epsilon(1e-6));
        CHECK(st.u.at(1, k) == doctest::Approx(k == 0 ? h : 0.0).scale(1.0).epsilon(1e-6));
    }
}

TEST_CASE("al_step keeps the box constraints") {
    std::mt19937_64 rng(41);
    const auto g = make_grid({4, 3}, 8);
    const auto D = testing::random_cyclic(g, rng, 0.0, 2.0);
    const auto S = testing::random_cyclic(g, rng, 0.0, 0.5);
    ALState st = ALState::initial(D);
    for (int it = 0; it < 50; ++it) {
        st = al_step(st, D, S, SolverConfig::al_defaults());
        for (std::size_t n = 0; n < g.num_nodes(); ++n) {
            CHECK(st.q.node_norm(n) <= S[n]);
            CHECK(st.p_sink[n] <= D[n]);
        }
    }
}

TEST_CASE("solve_al with S = 0 picks the cheapest bin") {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 5; ++t) {
        const auto g = testing::random_grid(rng, 5, 12);
        const auto D = testing::random_cyclic(g, rng, 0.0, 3.0);
        const auto r = solve_al(D, CyclicField(g, 0.0), tight(3000, 1e-9));
        CHECK(argmax_bins(r.final_u) == argmin_bins(D));
    }
}

TEST_CASE("solve_al with D = 0 stops at once") {
    const auto g = make_grid({3, 3}, 6);
    const auto r = solve_al(CyclicField(g, 0.0), CyclicField(g, 0.4), SolverConfig::al_defaults());
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.final_u == uniform_indicator(g));
    REQUIRE(r.trace.records.size() == 1);
    CHECK(r.trace.records[0].mean_G == 0.0);
    for (double l : r.labels.values()) CHECK(l == g.theta_center(0));
}

TEST_CASE("trace logging and non-convergence") {
    std::mt19937_64 rng(47);
    const auto g = make_grid({5, 5}, 8);
    const auto D = testing::random_cyclic(g, rng, 0.0, 2.0);
    auto cfg = tight(25);
    cfg.log_every = 10;
    int calls = 0;
    const auto r = solve_al(D, CyclicField(g, 0.2), cfg, [&](int it, const ALState&, const ALStepStats& s) {
        CHECK(it == ++calls);
        CHECK(s.max_G >= s.mean_G);
    });
    CHECK(calls == 25);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 25);
    REQUIRE(r.trace.records.size() == 3);
    CHECK(r.trace.records[0].iteration == 10);
    CHECK(r.trace.records[1].iteration == 20);
    CHECK(r.trace.records[2].iteration == 25);
    CHECK(r.trace.kind == SolverKind::al);
    CHECK(r.config_echo == cfg);
    CHECK(r.solver == SolverKind::al);
}

TEST_CASE("solve_al rejects bad inputs") {
    const auto g = make_grid({2}, 4);
    CyclicField S(g, 0.1);
    S[1] = -0.1;
    CHECK_THROWS_AS(solve_al(CyclicField(g, 1.0), S, SolverConfig::al_defaults()), std::invalid_argument);
    CHECK_THROWS_AS(solve_al(CyclicField(g, 1.0), CyclicField(make_grid({3}, 4)), SolverConfig::al_defaults()),
                    std::invalid_argument);
    auto cfg = SolverConfig::al_defaults();
    cfg.c = 0.0;
    CHECK_THROWS_AS(solve_al(CyclicField(g, 1.0), CyclicField(g, 0.1), cfg), std::invalid_argument);
}
