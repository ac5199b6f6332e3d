#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cmf/grid.hpp"

namespace cmf {

enum class SolverKind { al, pf };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

/// Controls for both solvers. `tolerance` is the mean |G| threshold for the
/// augmented-Lagrangian solver and the max |delta u| threshold for the
/// pseudo-flow solver. The anneal fields only affect the pseudo-flow solver:
/// after every iteration c <- max(c * anneal_factor, anneal_floor).
struct SolverConfig {
    double c = 0.25;
    double tau = 0.1;
    int max_iters = 5000;
    double tolerance = 1e-3;
    int log_every = 10;
    double anneal_factor = 1.0;
    double anneal_floor = 0.0;

    static SolverConfig al_defaults();
    static SolverConfig pf_defaults();
    static SolverConfig defaults_for(SolverKind kind);

    /// Throws std::invalid_argument on c <= 0, tau <= 0, max_iters < 1,
    /// tolerance < 0, log_every < 1 or an anneal factor outside (0, 1].
    void validate() const;

    bool operator==(const SolverConfig&) const = default;
};

/// One logged iteration. The augmented-Lagrangian solver fills mean_G and
/// max_G; the pseudo-flow solver fills pf_objective and max_du.
struct TraceRecord {
    int iteration = 0;
    double energy = 0.0;
    double mean_G = 0.0;
    double max_G = 0.0;
    double pf_objective = 0.0;
    double max_du = 0.0;
    double norm_err = 0.0;
};

struct ConvergenceTrace {
    SolverKind kind = SolverKind::al;
    std::vector<TraceRecord> records;
};

/// CSV with header "iteration,energy,mean_G,max_G,norm_err" (al) or
/// "iteration,energy,pf_objective,max_du,norm_err" (pf). Values use
/// round-trip precision.
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
ConvergenceTrace read_trace_csv(std::istream& in);

struct ReconstructionResult {
    SpatialField labels; ///< radians, bin centres in [-pi, pi)
    CyclicField final_u;
    ConvergenceTrace trace;
    bool converged = false;
    int iterations = 0;
    SolverKind solver = SolverKind::al;
    SolverConfig config_echo;
};

/// max over voxels of |integral of u over theta - 1|.
double normalization_error(const CyclicField& u);

} // namespace cmf
