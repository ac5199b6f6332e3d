#include "cmf/solver_pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cmf/data_term.hpp"
#include "cmf/diff_ops.hpp"

namespace cmf {

PFState PFState::initial(const CylinderGrid& grid) { return PFState{uniform_indicator(grid), FlowField(grid)}; }

double bregman_distance(const CyclicField& u, const CyclicField& v) {
    const auto& g = u.grid();
    require_same_grid(g, v.grid(), "bregman_distance");
    const std::size_t nt = g.n_theta();
    std::vector<double> terms(nt);
    double total = 0.0;
    for (std::size_t vox = 0; vox < g.num_voxels(); ++vox) {
        auto ub = u.bins(vox);
        auto vb = v.bins(vox);
        for (std::size_t k = 0; k < nt; ++k) {
            const double a = ub[k], b = vb[k];
            if (a < 0.0 || b < 0.0) throw std::invalid_argument("bregman_distance needs non-negative fields");
            if (a == 0.0) {
                terms[k] = b;
            } else {
                if (b == 0.0)
                    throw std::invalid_argument("bregman_distance: v is zero where u > 0 (node " +
                                                std::to_string(g.node(vox, k)) + ")");
                terms[k] = a * std::log(a / b) - a + b;
            }
        }
        total += theta_sum(terms);
    }
    return total * g.delta_theta();
}

void pf_label_update_into(const CyclicField& u, const CyclicField& D, const CyclicField& div_q, double c,
                          CyclicField& out) {
    const auto& g = u.grid();
    require_same_grid(g, D.grid(), "label update D");
    require_same_grid(g, div_q.grid(), "label update div q");
    require_same_grid(g, out.grid(), "label update output");
    if (!(c > 0.0)) throw std::invalid_argument("label update needs c > 0");
    const std::size_t nt = g.n_theta();
    const double dtheta = g.delta_theta();
    const auto nv = static_cast<long long>(g.num_voxels());
    const auto uv = u.values();
    const auto dv = D.values();
    const auto qv = div_q.values();
    auto ov = out.values();

#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const std::size_t base = static_cast<std::size_t>(vi) * nt;
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nt; ++k) top = std::max(top, -(dv[base + k] + qv[base + k]) / c);
        for (std::size_t k = 0; k < nt; ++k) {
            const double e = -(dv[base + k] + qv[base + k]) / c;
            ov[base + k] = uv[base + k] * std::exp(e - top);
        }
        const double z = theta_sum(ov.subspan(base, nt)) * dtheta;
        for (std::size_t k = 0; k < nt; ++k) ov[base + k] = std::max(ov[base + k] / z, kLabelFloor);
    }
}

CyclicField pf_label_update(const CyclicField& u, const CyclicField& D, const FlowField& q, double c) {
    CyclicField out(u.grid());
    pf_label_update_into(u, D, divergence(q), c, out);
    return out;
}

namespace {

void unnormalized_weight_into(const CyclicField& u, const CyclicField& D, const CyclicField& div_q, double c,
                              CyclicField& out) {
    for (std::size_t n = 0; n < u.size(); ++n) {
        out[n] = u[n] * std::exp(-(D[n] + div_q[n]) / c);
        if (!std::isfinite(out[n]))
            throw std::overflow_error("unnormalized flow weight overflowed at node " + std::to_string(n));
    }
}

void flow_step_into(FlowField& q, const CyclicField& weight, const CyclicField& S, double c, double tau,
                    FlowField& grad) {
    gradient_into(weight, grad);
    const double step = c * tau;
    for (std::size_t a = 0; a < q.num_components(); ++a) {
        auto qa = q.component(a);
        const auto ga = grad.component(a);
        const auto n = static_cast<long long>(qa.size());
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) qa[i] -= step * ga[i];
    }
    project_capacity_inplace(q, S);
}

void flow_weight_into(const CyclicField& u, const CyclicField& D, const CyclicField& div_q, double c,
                      PFFlowWeight mode, CyclicField& out) {
    if (mode == PFFlowWeight::normalized)
        pf_label_update_into(u, D, div_q, c, out);
    else
        unnormalized_weight_into(u, D, div_q, c, out);
}

double pf_objective_from_div(const CyclicField& D, const CyclicField& div_q) {
    const auto& g = D.grid();
    double total = 0.0;
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g.n_theta(); ++k) lo = std::min(lo, D.at(v, k) + div_q.at(v, k));
        total += lo;
    }
    return total;
}

} // namespace

FlowField pf_flow_update(const FlowField& q, const CyclicField& u, const CyclicField& D, const CyclicField& S,
                         double c, double tau, PFFlowWeight weight) {
    require_same_grid(q.grid(), u.grid(), "flow update u");
    require_same_grid(q.grid(), S.grid(), "flow update S");
    require_same_grid(q.grid(), D.grid(), "flow update D");
    CyclicField w(u.grid());
    flow_weight_into(u, D, divergence(q), c, weight, w);
    FlowField out = q;
    FlowField grad(q.grid());
    flow_step_into(out, w, S, c, tau, grad);
    return out;
}

double pf_objective(const CyclicField& D, const FlowField& q) {
    require_same_grid(D.grid(), q.grid(), "pf_objective");
    return pf_objective_from_div(D, divergence(q));
}

double proximal_objective(const CyclicField& u, const CyclicField& v, const CyclicField& D, const FlowField& q,
                          double c) {
    const auto& g = u.grid();
    require_same_grid(g, D.grid(), "proximal objective D");
    const CyclicField div = divergence(q);
    std::vector<double> terms(g.n_theta());
    double linear = 0.0;
    for (std::size_t vox = 0; vox < g.num_voxels(); ++vox) {
        for (std::size_t k = 0; k < g.n_theta(); ++k) terms[k] = u.at(vox, k) * (D.at(vox, k) + div.at(vox, k));
        linear += theta_sum(terms);
    }
    return linear * g.delta_theta() + c * bregman_distance(u, v);
}

ReconstructionResult solve_pf(const CyclicField& D, const CyclicField& S, const SolverConfig& cfg,
                              const PFObserver& observer, const PFOptions& options) {
    cfg.validate();
    require_same_grid(D.grid(), S.grid(), "solve_pf D/S");
    require_nonnegative(S, "smoothness S");
    if (!D.all_finite()) throw std::invalid_argument("data term D must be finite");

    const auto& g = D.grid();
    PFState st = PFState::initial(g);
    CyclicField div(g), weight(g), next(g);
    FlowField grad(g);
    double c = cfg.c;

    ReconstructionResult result;
    result.solver = SolverKind::pf;
    result.config_echo = cfg;
    result.trace.kind = SolverKind::pf;

    for (int it = 1; it <= cfg.max_iters; ++it) {
        divergence_into(st.q, div);
        flow_weight_into(st.u, D, div, c, options.flow_weight, weight);
        flow_step_into(st.q, weight, S, c, cfg.tau, grad);

        divergence_into(st.q, div);
        pf_label_update_into(st.u, D, div, c, next);
        double max_du = 0.0;
        for (std::size_t n = 0; n < next.size(); ++n) max_du = std::max(max_du, std::fabs(next[n] - st.u[n]));
        std::swap(st.u, next);

        const PFStepStats stats{max_du, c};
        if (observer) observer(it, st, stats);
        const bool done = max_du <= cfg.tolerance;
        if (done || it % cfg.log_every == 0 || it == cfg.max_iters) {
            TraceRecord r;
            r.iteration = it;
            r.energy = energy(st.u, D, S).total;
            r.pf_objective = pf_objective_from_div(D, div);
            r.max_du = max_du;
            r.norm_err = normalization_error(st.u);
            result.trace.records.push_back(r);
        }
        result.iterations = it;
        if (done) {
            result.converged = true;
            break;
        }
        c = std::max(c * cfg.anneal_factor, cfg.anneal_floor);
    }

    result.labels = extract_labels(st.u);
    result.final_u = std::move(st.u);
    return result;
}

} // namespace cmf
