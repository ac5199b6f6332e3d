#pragma once

#include <functional>

#include "cmf/solver_common.hpp"

namespace cmf {

/// Primal-dual variables of the augmented-Lagrangian max-flow solver.
struct ALState {
    CyclicField u;        ///< labelling density, the multiplier of the conservation constraint
    CyclicField p_sink;   ///< p_theta(x), bounded above by D
    SpatialField p_source; ///< p_S(x)
    FlowField q;          ///< spatial + theta flow, bounded by S

    /// u = 1/(2 pi), q = 0, p_sink = p_source = per-voxel minimum of D.
    static ALState initial(const CyclicField& D);
};

/// G = div q + p_sink - p_source, with p_source broadcast over theta.
CyclicField residual_G(const ALState& state);

struct ALStepStats {
    double mean_G = 0.0; ///< mean |G| over nodes, before the u update
    double max_G = 0.0;
};

/// Scratch buffers reused across iterations.
struct ALWorkspace {
    explicit ALWorkspace(const CylinderGrid& grid);
    CyclicField div;
    CyclicField scratch;
    FlowField grad;
    std::vector<double> voxel_acc;
};

/// One sweep of the four updates, each applied to the whole field before the next:
///   1. q <- Proj_{|q|<=S}(q + tau grad(div q + p_sink - p_source - u/c))
///   2. p_sink <- min(D, p_source - div q + u/c)
///   3. p_source <- (1/2pi)(1/c + integral(p_sink + div q - u/c) dtheta)
///   4. u <- u - c (div q - p_source + p_sink)
ALStepStats al_step_inplace(ALState& state, ALWorkspace& ws, const CyclicField& D, const CyclicField& S,
                            const SolverConfig& cfg);

ALState al_step(ALState state, const CyclicField& D, const CyclicField& S, const SolverConfig& cfg);

/// Called after every completed iteration (1-based).
using ALObserver = std::function<void(int iteration, const ALState& state, const ALStepStats& stats)>;

/// Runs al_step from ALState::initial(D) until mean |G| <= cfg.tolerance or
/// cfg.max_iters. Non-convergence is reported through `converged`, not thrown.
ReconstructionResult solve_al(const CyclicField& D, const CyclicField& S, const SolverConfig& cfg,
                              const ALObserver& observer = {});

} // namespace cmf
