#include "cmf/solver_al.hpp"

#include <algorithm>
#include <cmath>

#include "cmf/data_term.hpp"
#include "cmf/diff_ops.hpp"

namespace cmf {

ALState ALState::initial(const CyclicField& D) {
    const auto& g = D.grid();
    ALState s{uniform_indicator(g), CyclicField(g), SpatialField(g), FlowField(g)};
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        auto bins = D.bins(v);
        const double lo = *std::min_element(bins.begin(), bins.end());
        s.p_source[v] = lo;
        for (auto& x : s.p_sink.bins(v)) x = lo;
    }
    return s;
}

CyclicField residual_G(const ALState& state) {
    const auto& g = state.u.grid();
    require_same_grid(g, state.p_sink.grid(), "residual p_sink");
    require_same_grid(g, state.p_source.grid(), "residual p_source");
    require_same_grid(g, state.q.grid(), "residual q");
    CyclicField G = divergence(state.q);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        auto gb = G.bins(v);
        auto pb = state.p_sink.bins(v);
        for (std::size_t k = 0; k < g.n_theta(); ++k) gb[k] = gb[k] + pb[k] - state.p_source[v];
    }
    return G;
}

ALWorkspace::ALWorkspace(const CylinderGrid& grid)
    : div(grid), scratch(grid), grad(grid), voxel_acc(grid.num_voxels(), 0.0) {}

ALStepStats al_step_inplace(ALState& st, ALWorkspace& ws, const CyclicField& D, const CyclicField& S,
                            const SolverConfig& cfg) {
    const auto& g = st.u.grid();
    const std::size_t nt = g.n_theta();
    const auto nv = static_cast<long long>(g.num_voxels());
    const double c = cfg.c;
    const double tau = cfg.tau;
    const double dtheta = g.delta_theta();

    auto u = st.u.values();
    auto ps = st.p_sink.values();
    auto src = st.p_source.values();
    auto div = ws.div.values();
    auto tmp = ws.scratch.values();
    const auto d = D.values();

    // 1. spatial flow ascent + capacity projection
    divergence_into(st.q, ws.div);
#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        for (std::size_t n = v * nt; n < (v + 1) * nt; ++n) tmp[n] = div[n] + ps[n] - src[v] - u[n] / c;
    }
    gradient_into(ws.scratch, ws.grad);
    for (std::size_t a = 0; a < st.q.num_components(); ++a) {
        auto qa = st.q.component(a);
        const auto ga = ws.grad.component(a);
        const auto n = static_cast<long long>(qa.size());
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) qa[i] += tau * ga[i];
    }
    project_capacity_inplace(st.q, S);

    // 2. sink flows
    divergence_into(st.q, ws.div);
#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        for (std::size_t n = v * nt; n < (v + 1) * nt; ++n)
            ps[n] = std::min(d[n], src[v] - div[n] + u[n] / c);
    }

    // 3. source flow, 4. multiplier; both are per-voxel so they share a pass
    double max_g = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_g)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        const std::size_t base = v * nt;
        for (std::size_t k = 0; k < nt; ++k) tmp[base + k] = ps[base + k] + div[base + k] - u[base + k] / c;
        src[v] = (1.0 / kTwoPi) * (1.0 / c + theta_sum(tmp.subspan(base, nt)) * dtheta);
        for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t n = base + k;
            const double G = div[n] + ps[n] - src[v];
            u[n] -= c * G;
            tmp[n] = std::fabs(G);
            max_g = std::max(max_g, tmp[n]);
        }
        ws.voxel_acc[v] = theta_sum(tmp.subspan(base, nt));
    }

    double total = 0.0;
    for (double x : ws.voxel_acc) total += x;
    return ALStepStats{total / static_cast<double>(g.num_nodes()), max_g};
}

ALState al_step(ALState state, const CyclicField& D, const CyclicField& S, const SolverConfig& cfg) {
    ALWorkspace ws(state.u.grid());
    al_step_inplace(state, ws, D, S, cfg);
    return state;
}

ReconstructionResult solve_al(const CyclicField& D, const CyclicField& S, const SolverConfig& cfg,
                              const ALObserver& observer) {
    cfg.validate();
    require_same_grid(D.grid(), S.grid(), "solve_al D/S");
    require_nonnegative(S, "smoothness S");
    if (!D.all_finite()) throw std::invalid_argument("data term D must be finite");

    ALState st = ALState::initial(D);
    ALWorkspace ws(D.grid());
    ReconstructionResult result;
    result.solver = SolverKind::al;
    result.config_echo = cfg;
    result.trace.kind = SolverKind::al;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const ALStepStats stats = al_step_inplace(st, ws, D, S, cfg);
        if (observer) observer(it, st, stats);
        const bool done = stats.mean_G <= cfg.tolerance;
        if (done || it % cfg.log_every == 0 || it == cfg.max_iters) {
            TraceRecord r;
            r.iteration = it;
            r.energy = energy_clipped(st.u, D, S).total;
            r.mean_G = stats.mean_G;
            r.max_G = stats.max_G;
            r.norm_err = normalization_error(st.u);
            result.trace.records.push_back(r);
        }
        result.iterations = it;
        if (done) {
            result.converged = true;
            break;
        }
    }

    result.labels = extract_labels(st.u);
    result.final_u = std::move(st.u);
    return result;
}

} // namespace cmf
