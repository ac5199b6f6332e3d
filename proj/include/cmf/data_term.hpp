#pragma once

#include <span>

#include "cmf/grid.hpp"

namespace cmf {

/// Per-voxel observed angle in [-pi, pi) with a non-negative confidence weight.
struct CyclicObservation {
    CylinderGrid grid;
    SpatialField angle;
    SpatialField weight;
};

struct EnergyReport {
    double data_energy = 0.0;
    double smoothness_energy = 0.0;
    double total = 0.0;
};

/// Geodesic distance on the unit circle, in [0, pi].
double cyclic_distance(double a, double b);

/// Validates angle range and weights; throws std::invalid_argument.
CyclicObservation make_observation(const CylinderGrid& grid, SpatialField angle, SpatialField weight);

/// D(voxel, k) = scale * weight(voxel) * cyclic_distance(theta_k, angle(voxel))^power,
/// power in {1, 2}, scale > 0.
CyclicField build_data_term(const CyclicObservation& obs, int power = 1, double scale = 1.0);

/// Angle from atan2(imag, real), weight = modulus. A zero sample gets angle 0.
CyclicObservation phase_from_complex(const CylinderGrid& grid, std::span<const double> real_part,
                                     std::span<const double> imag_part);

/// Hexcone hue with red at 0 increasing through yellow and green, mapped to
/// [-pi, pi). Weight is saturation * value (chroma), zero for grays.
CyclicObservation hue_from_rgb(const CylinderGrid& grid, std::span<const double> r,
                               std::span<const double> g, std::span<const double> b);

/// Relaxed energy of a labelling density u:
///   sum D u dtheta  +  sum S |grad u| dtheta     (unit voxel volume)
/// Throws on grid mismatch or negative u.
EnergyReport energy(const CyclicField& u, const CyclicField& D, const CyclicField& S);

/// Same as energy() after clamping u to >= 0.
EnergyReport energy_clipped(const CyclicField& u, const CyclicField& D, const CyclicField& S);

/// Per-voxel bin of maximal u (lowest index on ties).
std::vector<std::size_t> argmax_bins(const CyclicField& u);

/// Per-voxel centre angle of the maximal bin.
SpatialField extract_labels(const CyclicField& u);

/// Per-voxel bin of minimal D (lowest index on ties).
std::vector<std::size_t> argmin_bins(const CyclicField& D);

/// Constant smoothness capacity.
CyclicField constant_field(const CylinderGrid& grid, double value);

/// Broadcasts a per-voxel map over theta.
CyclicField broadcast_theta(const SpatialField& s);

/// sqrt(mean cyclic_distance(a, b)^2) over voxels.
double cyclic_rmse(const SpatialField& a, const SpatialField& b);

} // namespace cmf
