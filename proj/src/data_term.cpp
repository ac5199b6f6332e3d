#include "cmf/data_term.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmf/diff_ops.hpp"

namespace cmf {

double cyclic_distance(double a, double b) {
    double d = std::fmod(std::fabs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

CyclicObservation make_observation(const CylinderGrid& grid, SpatialField angle, SpatialField weight) {
    require_same_grid(grid, angle.grid(), "observation angle");
    require_same_grid(grid, weight.grid(), "observation weight");
    for (std::size_t v = 0; v < grid.num_voxels(); ++v) {
        const double a = angle[v];
        if (!std::isfinite(a) || a < -std::numbers::pi || a >= std::numbers::pi)
            throw std::invalid_argument("observed angle outside [-pi, pi) at voxel " + std::to_string(v));
        if (!std::isfinite(weight[v]) || weight[v] < 0.0)
            throw std::invalid_argument("observation weight must be finite and >= 0 at voxel " +
                                        std::to_string(v));
    }
    return CyclicObservation{grid, std::move(angle), std::move(weight)};
}

CyclicField build_data_term(const CyclicObservation& obs, int power, double scale) {
    if (power != 1 && power != 2)
        throw std::invalid_argument("data term power must be 1 or 2, got " + std::to_string(power));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("data term scale must be > 0");
    const auto& g = obs.grid;
    CyclicField D(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        const double w = scale * obs.weight[v];
        auto bins = D.bins(v);
        for (std::size_t k = 0; k < g.n_theta(); ++k) {
            const double d = cyclic_distance(g.theta_center(k), obs.angle[v]);
            bins[k] = w * (power == 1 ? d : d * d);
        }
    }
    return D;
}

CyclicObservation phase_from_complex(const CylinderGrid& grid, std::span<const double> real_part,
                                     std::span<const double> imag_part) {
    if (real_part.size() != imag_part.size())
        throw std::invalid_argument("real and imaginary parts differ in size");
    if (real_part.size() != grid.num_voxels())
        throw std::invalid_argument("complex image size does not match grid");
    SpatialField angle(grid), weight(grid);
    for (std::size_t v = 0; v < grid.num_voxels(); ++v) {
        const double re = real_part[v], im = imag_part[v];
        weight[v] = std::hypot(re, im);
        angle[v] = weight[v] == 0.0 ? 0.0 : wrap_angle(std::atan2(im, re));
    }
    return make_observation(grid, std::move(angle), std::move(weight));
}

CyclicObservation hue_from_rgb(const CylinderGrid& grid, std::span<const double> r,
                               std::span<const double> g, std::span<const double> b) {
    if (r.size() != g.size() || r.size() != b.size())
        throw std::invalid_argument("rgb channels differ in size");
    if (r.size() != grid.num_voxels()) throw std::invalid_argument("rgb image size does not match grid");
    SpatialField angle(grid), weight(grid);
    for (std::size_t v = 0; v < grid.num_voxels(); ++v) {
        const double R = r[v], G = g[v], B = b[v];
        const double mx = std::max({R, G, B});
        const double mn = std::min({R, G, B});
        const double chroma = mx - mn;
        double hue = 0.0; // sextants of the hexcone, in units of 60 degrees
        if (chroma > 0.0) {
            if (mx == R)
                hue = std::fmod((G - B) / chroma + 6.0, 6.0);
            else if (mx == G)
                hue = (B - R) / chroma + 2.0;
            else
                hue = (R - G) / chroma + 4.0;
        }
        angle[v] = wrap_angle(hue * (std::numbers::pi / 3.0));
        // saturation * value of HSV is the chroma
        weight[v] = chroma;
    }
    return make_observation(grid, std::move(angle), std::move(weight));
}

namespace {

EnergyReport energy_impl(const CyclicField& u, const CyclicField& D, const CyclicField& S, bool clip) {
    const auto& g = u.grid();
    require_same_grid(g, D.grid(), "energy data term");
    require_same_grid(g, S.grid(), "energy smoothness term");
    CyclicField uu = u;
    for (auto& x : uu.values()) {
        if (clip)
            x = std::max(x, 0.0);
        else if (x < 0.0)
            throw std::invalid_argument("energy requires u >= 0");
    }
    const FlowField grad = gradient(uu);
    const std::size_t nt = g.n_theta();
    std::vector<double> data_v(g.num_voxels()), smooth_v(g.num_voxels());
    const auto nv = static_cast<long long>(g.num_voxels());

#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        double data_buf[128];
        double smooth_buf[128];
        std::vector<double> data_heap, smooth_heap;
        double* dp = data_buf;
        double* sp = smooth_buf;
        if (nt > 128) {
            data_heap.resize(nt);
            smooth_heap.resize(nt);
            dp = data_heap.data();
            sp = smooth_heap.data();
        }
        for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t node = v * nt + k;
            dp[k] = D[node] * uu[node];
            sp[k] = S[node] * grad.node_norm(node);
        }
        data_v[v] = theta_sum({dp, nt});
        smooth_v[v] = theta_sum({sp, nt});
    }

    EnergyReport r;
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        r.data_energy += data_v[v];
        r.smoothness_energy += smooth_v[v];
    }
    r.data_energy *= g.delta_theta();
    r.smoothness_energy *= g.delta_theta();
    r.total = r.data_energy + r.smoothness_energy;
    return r;
}

} // namespace

EnergyReport energy(const CyclicField& u, const CyclicField& D, const CyclicField& S) {
    return energy_impl(u, D, S, false);
}

EnergyReport energy_clipped(const CyclicField& u, const CyclicField& D, const CyclicField& S) {
    return energy_impl(u, D, S, true);
}

std::vector<std::size_t> argmax_bins(const CyclicField& u) {
    const auto& g = u.grid();
    std::vector<std::size_t> out(g.num_voxels());
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        auto bins = u.bins(v);
        out[v] = static_cast<std::size_t>(std::max_element(bins.begin(), bins.end()) - bins.begin());
    }
    return out;
}

std::vector<std::size_t> argmin_bins(const CyclicField& D) {
    const auto& g = D.grid();
    std::vector<std::size_t> out(g.num_voxels());
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        auto bins = D.bins(v);
        out[v] = static_cast<std::size_t>(std::min_element(bins.begin(), bins.end()) - bins.begin());
    }
    return out;
}

SpatialField extract_labels(const CyclicField& u) {
    const auto& g = u.grid();
    const auto bins = argmax_bins(u);
    SpatialField out(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v) out[v] = g.theta_center(bins[v]);
    return out;
}

CyclicField constant_field(const CylinderGrid& grid, double value) { return CyclicField(grid, value); }

CyclicField broadcast_theta(const SpatialField& s) {
    const auto& g = s.grid();
    CyclicField out(g);
    for (std::size_t v = 0; v < g.num_voxels(); ++v)
        for (auto& x : out.bins(v)) x = s[v];
    return out;
}

double cyclic_rmse(const SpatialField& a, const SpatialField& b) {
    if (a.grid().spatial_dims() != b.grid().spatial_dims())
        throw std::invalid_argument("rmse operands differ in spatial shape");
    double acc = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v) {
        const double d = cyclic_distance(a[v], b[v]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

} // namespace cmf
