#include "cmf/diff_ops.hpp"

#include <array>
#include <cmath>
#include <string>

namespace cmf {

namespace {

struct AxisInfo {
    std::size_t n;            // voxels along the axis
    std::size_t voxel_stride; // voxel index step
};

std::array<AxisInfo, 3> axis_info(const CylinderGrid& g) {
    std::array<AxisInfo, 3> info{};
    for (std::size_t a = 0; a < g.num_axes(); ++a) info[a] = {g.spatial_dims()[a], g.voxel_stride(a)};
    return info;
}

} // namespace

void gradient_into(const CyclicField& u, FlowField& out) {
    const auto& g = u.grid();
    require_same_grid(g, out.grid(), "gradient output");
    const std::size_t nt = g.n_theta();
    const std::size_t axes = g.num_axes();
    const auto info = axis_info(g);
    const auto uv = u.values();
    const auto nv = static_cast<long long>(g.num_voxels());

#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        const std::size_t base = v * nt;
        for (std::size_t a = 0; a < axes; ++a) {
            auto ga = out.component(a);
            const std::size_t coord = (v / info[a].voxel_stride) % info[a].n;
            if (coord + 1 < info[a].n) {
                const std::size_t step = info[a].voxel_stride * nt;
                for (std::size_t k = 0; k < nt; ++k) ga[base + k] = uv[base + step + k] - uv[base + k];
            } else {
                for (std::size_t k = 0; k < nt; ++k) ga[base + k] = 0.0;
            }
        }
        auto gt = out.component(axes);
        for (std::size_t k = 0; k + 1 < nt; ++k) gt[base + k] = uv[base + k + 1] - uv[base + k];
        gt[base + nt - 1] = uv[base] - uv[base + nt - 1];
    }
}

FlowField gradient(const CyclicField& u) {
    FlowField out(u.grid());
    gradient_into(u, out);
    return out;
}

void divergence_into(const FlowField& q, CyclicField& out) {
    const auto& g = q.grid();
    require_same_grid(g, out.grid(), "divergence output");
    const std::size_t nt = g.n_theta();
    const std::size_t axes = g.num_axes();
    const auto info = axis_info(g);
    auto dv = out.values();
    const auto nv = static_cast<long long>(g.num_voxels());
    const auto qt = q.component(axes);

#pragma omp parallel for schedule(static)
    for (long long vi = 0; vi < nv; ++vi) {
        const auto v = static_cast<std::size_t>(vi);
        const std::size_t base = v * nt;
        dv[base] = qt[base] - qt[base + nt - 1];
        for (std::size_t k = 1; k < nt; ++k) dv[base + k] = qt[base + k] - qt[base + k - 1];
        for (std::size_t a = 0; a < axes; ++a) {
            const auto qa = q.component(a);
            const std::size_t coord = (v / info[a].voxel_stride) % info[a].n;
            const std::size_t step = info[a].voxel_stride * nt;
            const bool has_out = coord + 1 < info[a].n;
            const bool has_in = coord > 0;
            for (std::size_t k = 0; k < nt; ++k) {
                double d = 0.0;
                if (has_out) d += qa[base + k];
                if (has_in) d -= qa[base - step + k];
                dv[base + k] += d;
            }
        }
    }
}

CyclicField divergence(const FlowField& q) {
    CyclicField out(q.grid());
    divergence_into(q, out);
    return out;
}

void require_nonnegative(const CyclicField& S, const char* what) {
    const auto s = S.values();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!(s[i] >= 0.0) || !std::isfinite(s[i]))
            throw std::invalid_argument(std::string(what) + " must be finite and >= 0 (node " +
                                        std::to_string(i) + ")");
}

void project_capacity_inplace(FlowField& q, const CyclicField& S) {
    require_same_grid(q.grid(), S.grid(), "capacity field");
    require_nonnegative(S, "capacity");
    const std::size_t comps = q.num_components();
    const auto s = S.values();
    const auto n = static_cast<long long>(s.size());

#pragma omp parallel for schedule(static)
    for (long long ni = 0; ni < n; ++ni) {
        const auto node = static_cast<std::size_t>(ni);
        const double cap = s[node];
        const double norm = q.node_norm(node);
        if (norm <= cap) continue;
        if (cap == 0.0) {
            for (std::size_t a = 0; a < comps; ++a) q.component(a)[node] = 0.0;
            continue;
        }
        double orig[4];
        for (std::size_t a = 0; a < comps; ++a) orig[a] = q.component(a)[node];
        // shrink the scale until the rounded vector is inside the ball, so a
        // second projection is a no-op
        double scale = cap / norm;
        for (;;) {
            for (std::size_t a = 0; a < comps; ++a) q.component(a)[node] = orig[a] * scale;
            if (q.node_norm(node) <= cap) break;
            scale = std::nextafter(scale, 0.0);
        }
    }
}

FlowField project_capacity(FlowField q, const CyclicField& S) {
    project_capacity_inplace(q, S);
    return q;
}

} // namespace cmf
