#pragma once

#include <functional>

#include "cmf/solver_common.hpp"

namespace cmf {

/// Labelling and flow of the pseudo-flow (Bregman proximal) solver. u stays
/// on the simplex: u >= 0 and integral u dtheta = 1 per voxel.
struct PFState {
    CyclicField u;
    FlowField q;

    static PFState initial(const CylinderGrid& grid);
};

/// Smallest value u entries are raised to after a label update.
inline constexpr double kLabelFloor = 1e-300;

/// Entropic Bregman distance sum (u ln(u/v) - u + v) dtheta with 0 ln 0 = 0.
/// Throws std::invalid_argument if u < 0, v < 0, or v == 0 where u > 0.
double bregman_distance(const CyclicField& u, const CyclicField& v);

/// u' proportional to u exp(-(D + div q)/c), renormalised to integrate to 1
/// over theta. The exponent is shifted by its per-voxel maximum first.
CyclicField pf_label_update(const CyclicField& u, const CyclicField& D, const FlowField& q, double c);

/// Same update with div q supplied, writing into `out` (which may alias u).
void pf_label_update_into(const CyclicField& u, const CyclicField& D, const CyclicField& div_q, double c,
                          CyclicField& out);

/// Which field the flow step differentiates.
enum class PFFlowWeight {
    /// The label update pf_label_update(u, D, q, c) itself (renormalised).
    normalized,
    /// u exp(-(D + div q)/c) without renormalisation.
    unnormalized,
};

/// q <- Proj_{|q|<=S}(q - c tau grad(w)), where w is chosen by `weight`.
FlowField pf_flow_update(const FlowField& q, const CyclicField& u, const CyclicField& D, const CyclicField& S,
                         double c, double tau, PFFlowWeight weight = PFFlowWeight::normalized);

/// sum over voxels of min over theta of (D + div q).
double pf_objective(const CyclicField& D, const FlowField& q);

/// The proximal objective with the flow held fixed:
///   sum u (D + div q) dtheta + c * bregman_distance(u, v)
double proximal_objective(const CyclicField& u, const CyclicField& v, const CyclicField& D,
                          const FlowField& q, double c);

struct PFStepStats {
    double max_du = 0.0;
    double c = 0.0; ///< temperature used by this iteration
};

using PFObserver = std::function<void(int iteration, const PFState& state, const PFStepStats& stats)>;

struct PFOptions {
    PFFlowWeight flow_weight = PFFlowWeight::normalized;
};

/// Alternates pf_flow_update and pf_label_update from u = 1/(2 pi), q = 0
/// until max |delta u| <= cfg.tolerance or cfg.max_iters.
ReconstructionResult solve_pf(const CyclicField& D, const CyclicField& S, const SolverConfig& cfg,
                              const PFObserver& observer = {}, const PFOptions& options = {});

} // namespace cmf
