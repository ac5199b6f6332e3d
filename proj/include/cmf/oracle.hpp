#pragma once

#include <cstdint>
#include <vector>

#include "cmf/grid.hpp"

namespace cmf {

/// Exact discrete reference problems for small grids:
///   E(l) = sum_x D(x, l_x) + sum_{edges (a,b)} w_ab * cyclic_distance(theta_{l_a}, theta_{l_b})

struct SpatialEdge {
    std::size_t a;
    std::size_t b;
    double weight;
};

struct DiscreteInstance {
    CylinderGrid grid;
    CyclicField D;
    std::vector<SpatialEdge> edges;
};

/// Largest labelling count brute_force() will enumerate.
inline constexpr std::uint64_t kMaxExhaustiveLabelings = std::uint64_t{1} << 24;

/// All nearest-neighbour grid edges with the same weight (must be >= 0).
DiscreteInstance make_instance(CyclicField D, double edge_weight);

/// Edge weight matching a constant continuous smoothness S. Between two
/// one-hot columns the relaxed energy charges sqrt(2) S for a label change of
/// any size; w = sqrt(2) S / dtheta makes a one-bin change cost the same here.
double edge_weight_for_smoothness(double S, const CylinderGrid& grid);

using Labeling = std::vector<std::size_t>;

struct DiscreteSolution {
    Labeling labels;
    double energy = 0.0;
};

/// Throws std::invalid_argument on a wrong-length labelling or a bin index out of range.
double discrete_energy(const Labeling& labels, const DiscreteInstance& inst);

/// Global minimiser by enumeration in lexicographic order, voxel 0 most
/// significant. A labelling replaces the incumbent only if it is better by
/// more than a relative 1e-12, so near-ties resolve to the lexicographically
/// smallest. Throws std::invalid_argument above kMaxExhaustiveLabelings.
DiscreteSolution brute_force(const DiscreteInstance& inst);

/// Exact minimiser for grids whose voxels form a single chain (at most one
/// spatial axis longer than 1), using the same tie rule as brute_force().
/// Throws std::invalid_argument for any other topology.
DiscreteSolution chain_dp(const DiscreteInstance& inst);

/// Converts bin indices to angles (bin centres).
SpatialField labels_to_angles(const Labeling& labels, const CylinderGrid& grid);

/// Nearest bin per voxel, inverse of labels_to_angles for bin-centre angles.
Labeling angles_to_labels(const SpatialField& angles);

} // namespace cmf
