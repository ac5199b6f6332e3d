#include "cmf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cmf {

double wrap_angle(double angle) {
    double w = std::fmod(angle + std::numbers::pi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    w -= std::numbers::pi;
    // fmod can land exactly on +pi after the shift back
    if (w >= std::numbers::pi) w = -std::numbers::pi;
    return w;
}

CylinderGrid make_grid(const std::vector<long long>& spatial_dims, long long n_theta) {
    if (spatial_dims.empty() || spatial_dims.size() > 3)
        throw std::invalid_argument("grid must have 1 to 3 spatial axes, got " +
                                    std::to_string(spatial_dims.size()));
    if (n_theta < 2)
        throw std::invalid_argument("n_theta must be >= 2, got " + std::to_string(n_theta));

    CylinderGrid g;
    g.num_voxels_ = 1;
    for (long long d : spatial_dims) {
        if (d < 1) throw std::invalid_argument("spatial dims must be >= 1, got " + std::to_string(d));
        g.dims_.push_back(static_cast<std::size_t>(d));
        g.num_voxels_ *= static_cast<std::size_t>(d);
    }
    g.voxel_strides_.assign(g.dims_.size(), 1);
    for (std::size_t a = g.dims_.size(); a-- > 1;)
        g.voxel_strides_[a - 1] = g.voxel_strides_[a] * g.dims_[a];
    g.n_theta_ = static_cast<std::size_t>(n_theta);
    g.delta_theta_ = kTwoPi / static_cast<double>(n_theta);
    return g;
}

std::size_t CylinderGrid::nearest_bin(double angle) const {
    const double offset = wrap_angle(angle) + std::numbers::pi;
    auto k = static_cast<std::size_t>(std::floor(offset / delta_theta_));
    return std::min(k, n_theta_ - 1);
}

void require_same_grid(const CylinderGrid& a, const CylinderGrid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string("grid mismatch: ") + what);
}

namespace {

bool finite_span(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

CyclicField::CyclicField(CylinderGrid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.num_nodes(), fill) {}

CyclicField::CyclicField(CylinderGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.num_nodes())
        throw std::invalid_argument("cyclic field needs " + std::to_string(grid_.num_nodes()) +
                                    " values, got " + std::to_string(values_.size()));
}

bool CyclicField::all_finite() const { return finite_span(values_); }

SpatialField::SpatialField(CylinderGrid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.num_voxels(), fill) {}

SpatialField::SpatialField(CylinderGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.num_voxels())
        throw std::invalid_argument("spatial field needs " + std::to_string(grid_.num_voxels()) +
                                    " values, got " + std::to_string(values_.size()));
}

bool SpatialField::all_finite() const { return finite_span(values_); }

FlowField::FlowField(CylinderGrid grid)
    : grid_(std::move(grid)),
      components_(grid_.num_axes() + 1, std::vector<double>(grid_.num_nodes(), 0.0)) {}

double FlowField::node_norm(std::size_t node) const {
    double sq = 0.0;
    for (const auto& c : components_) sq += c[node] * c[node];
    return std::sqrt(sq);
}

void FlowField::fill(double value) {
    for (auto& c : components_) std::fill(c.begin(), c.end(), value);
}

bool FlowField::all_finite() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const std::vector<double>& c) { return finite_span(c); });
}

double theta_sum(std::span<const double> bins) {
    constexpr std::size_t kStack = 128;
    double stack_buf[kStack];
    std::vector<double> heap_buf;
    std::span<double> buf;
    if (bins.size() <= kStack) {
        buf = std::span<double>(stack_buf, bins.size());
    } else {
        heap_buf.resize(bins.size());
        buf = heap_buf;
    }
    std::copy(bins.begin(), bins.end(), buf.begin());
    std::sort(buf.begin(), buf.end());
    double s = 0.0;
    for (double v : buf) s += v;
    return s;
}

SpatialField integrate_theta(const CyclicField& f) {
    const auto& g = f.grid();
    SpatialField out(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v)
        out[v] = theta_sum(f.bins(v)) * g.delta_theta();
    return out;
}

CyclicField uniform_indicator(const CylinderGrid& grid) {
    return CyclicField(grid, 1.0 / kTwoPi);
}

CyclicField rotate_theta(const CyclicField& f, long long shift) {
    const auto& g = f.grid();
    const auto n = static_cast<long long>(g.n_theta());
    const auto s = static_cast<std::size_t>(((shift % n) + n) % n);
    CyclicField out(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        auto src = f.bins(v);
        auto dst = out.bins(v);
        for (std::size_t k = 0; k < g.n_theta(); ++k) dst[(k + s) % g.n_theta()] = src[k];
    }
    return out;
}

} // namespace cmf
