#pragma once

#include "cmf/grid.hpp"

namespace cmf {

// Collocated finite differences on the cylinder. Spatial axes use forward
// differences with a zero-flux last voxel; theta uses unit-spacing forward
// differences that wrap from bin n_theta-1 to bin 0. divergence() is the
// exact negative adjoint of gradient():
//
//   <divergence(q), u> == -<q, gradient(u)>

FlowField gradient(const CyclicField& u);
void gradient_into(const CyclicField& u, FlowField& out);

/// Backward differences. Flow stored on the last voxel of a spatial axis is
/// ignored, matching the zero entries gradient() writes there.
CyclicField divergence(const FlowField& q);
void divergence_into(const FlowField& q, CyclicField& out);

/// Radial projection of each node's (spatial + theta) flow vector onto the
/// ball of radius S at that node. Throws std::invalid_argument if S < 0
/// anywhere. Idempotent bit-for-bit: a projected vector's node_norm() never
/// exceeds S.
FlowField project_capacity(FlowField q, const CyclicField& S);
void project_capacity_inplace(FlowField& q, const CyclicField& S);

/// Throws std::invalid_argument unless every entry is finite and >= 0.
void require_nonnegative(const CyclicField& S, const char* what);

} // namespace cmf
