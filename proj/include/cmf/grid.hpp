#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmf {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle into [-pi, pi).
double wrap_angle(double angle);

/// Discretized cylinder: a 1-3 axis spatial grid times n_theta cyclic bins
/// covering [-pi, pi). Bin k is centred at -pi + (k + 1/2) * delta_theta.
///
/// Node layout is voxel-major with theta fastest: node = voxel * n_theta + k.
/// Voxels are row-major over the spatial axes (last axis fastest).
class CylinderGrid {
public:
    CylinderGrid() = default;

    const std::vector<std::size_t>& spatial_dims() const { return dims_; }
    std::size_t num_axes() const { return dims_.size(); }
    std::size_t n_theta() const { return n_theta_; }
    double delta_theta() const { return delta_theta_; }

    std::size_t num_voxels() const { return num_voxels_; }
    std::size_t num_nodes() const { return num_voxels_ * n_theta_; }

    /// Voxel-index stride of a spatial axis.
    std::size_t voxel_stride(std::size_t axis) const { return voxel_strides_.at(axis); }

    double theta_center(std::size_t k) const {
        return -std::numbers::pi + (static_cast<double>(k) + 0.5) * delta_theta_;
    }

    /// Index of the bin whose centre is cyclically closest to `angle`.
    std::size_t nearest_bin(double angle) const;

    std::size_t node(std::size_t voxel, std::size_t k) const { return voxel * n_theta_ + k; }

    bool operator==(const CylinderGrid& other) const {
        return dims_ == other.dims_ && n_theta_ == other.n_theta_;
    }

    friend CylinderGrid make_grid(const std::vector<long long>& spatial_dims, long long n_theta);

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> voxel_strides_;
    std::size_t n_theta_ = 0;
    std::size_t num_voxels_ = 0;
    double delta_theta_ = 0.0;
};

/// Throws std::invalid_argument unless 1 <= axes <= 3, every dim >= 1 and n_theta >= 2.
CylinderGrid make_grid(const std::vector<long long>& spatial_dims, long long n_theta);

inline CylinderGrid make_grid(std::initializer_list<long long> spatial_dims, long long n_theta) {
    return make_grid(std::vector<long long>(spatial_dims), n_theta);
}

void require_same_grid(const CylinderGrid& a, const CylinderGrid& b, const char* what);

/// One value per (voxel, theta bin).
class CyclicField {
public:
    CyclicField() = default;
    explicit CyclicField(CylinderGrid grid, double fill = 0.0);
    CyclicField(CylinderGrid grid, std::vector<double> values);

    const CylinderGrid& grid() const { return grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t node) { return values_[node]; }
    double operator[](std::size_t node) const { return values_[node]; }
    double& at(std::size_t voxel, std::size_t k) { return values_[grid_.node(voxel, k)]; }
    double at(std::size_t voxel, std::size_t k) const { return values_[grid_.node(voxel, k)]; }

    /// The n_theta bins of one voxel.
    std::span<double> bins(std::size_t voxel) {
        return std::span<double>(values_).subspan(voxel * grid_.n_theta(), grid_.n_theta());
    }
    std::span<const double> bins(std::size_t voxel) const {
        return std::span<const double>(values_).subspan(voxel * grid_.n_theta(), grid_.n_theta());
    }

    bool all_finite() const;
    bool operator==(const CyclicField& other) const = default;

private:
    CylinderGrid grid_;
    std::vector<double> values_;
};

/// One value per voxel (no theta axis).
class SpatialField {
public:
    SpatialField() = default;
    explicit SpatialField(CylinderGrid grid, double fill = 0.0);
    SpatialField(CylinderGrid grid, std::vector<double> values);

    const CylinderGrid& grid() const { return grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t voxel) { return values_[voxel]; }
    double operator[](std::size_t voxel) const { return values_[voxel]; }

    bool all_finite() const;
    bool operator==(const SpatialField& other) const = default;

private:
    CylinderGrid grid_;
    std::vector<double> values_;
};

/// Vector field over the cylinder, stored one array per axis. Axes
/// 0..num_axes()-1 are spatial; axis num_axes() is theta.
class FlowField {
public:
    FlowField() = default;
    explicit FlowField(CylinderGrid grid);

    const CylinderGrid& grid() const { return grid_; }
    std::size_t num_components() const { return components_.size(); }
    std::size_t theta_axis() const { return components_.size() - 1; }

    std::span<double> component(std::size_t axis) { return components_.at(axis); }
    std::span<const double> component(std::size_t axis) const { return components_.at(axis); }

    /// Euclidean norm of the per-node component vector, summed in axis order.
    double node_norm(std::size_t node) const;

    void fill(double value);
    bool all_finite() const;
    bool operator==(const FlowField& other) const = default;

private:
    CylinderGrid grid_;
    std::vector<std::vector<double>> components_;
};

/// Sum of a voxel's theta bins that does not depend on where the cyclic
/// sequence starts: values are summed in ascending order. This keeps every
/// theta reduction exactly equivariant under bin rotation.
double theta_sum(std::span<const double> bins);

/// Midpoint quadrature over theta: theta_sum(bins) * delta_theta, per voxel.
SpatialField integrate_theta(const CyclicField& f);

/// u = 1/(2 pi) at every node.
CyclicField uniform_indicator(const CylinderGrid& grid);

/// Cyclically shifts every voxel's theta bins so new[k + shift] = old[k].
CyclicField rotate_theta(const CyclicField& f, long long shift);

} // namespace cmf
