#include "cmf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cmf/data_term.hpp"

namespace cmf {

namespace {

constexpr double kTieRel = 1e-12;

double tie_slack(double reference) { return kTieRel * std::max(1.0, std::fabs(reference)); }

} // namespace

DiscreteInstance make_instance(CyclicField D, double edge_weight) {
    if (!(edge_weight >= 0.0) || !std::isfinite(edge_weight))
        throw std::invalid_argument("edge weight must be finite and >= 0");
    DiscreteInstance inst{D.grid(), std::move(D), {}};
    const auto& g = inst.grid;
    for (std::size_t v = 0; v < g.num_voxels(); ++v) {
        for (std::size_t a = 0; a < g.num_axes(); ++a) {
            const std::size_t stride = g.voxel_stride(a);
            const std::size_t coord = (v / stride) % g.spatial_dims()[a];
            if (coord + 1 < g.spatial_dims()[a]) inst.edges.push_back({v, v + stride, edge_weight});
        }
    }
    return inst;
}

double edge_weight_for_smoothness(double S, const CylinderGrid& grid) {
    return std::numbers::sqrt2 * S / grid.delta_theta();
}

double discrete_energy(const Labeling& labels, const DiscreteInstance& inst) {
    const auto& g = inst.grid;
    if (labels.size() != g.num_voxels())
        throw std::invalid_argument("labelling has " + std::to_string(labels.size()) + " entries, grid has " +
                                    std::to_string(g.num_voxels()) + " voxels");
    double data = 0.0;
    for (std::size_t v = 0; v < labels.size(); ++v) {
        if (labels[v] >= g.n_theta())
            throw std::invalid_argument("label " + std::to_string(labels[v]) + " out of range at voxel " +
                                        std::to_string(v));
        data += inst.D.at(v, labels[v]);
    }
    double smooth = 0.0;
    for (const auto& e : inst.edges)
        smooth += e.weight * cyclic_distance(g.theta_center(labels[e.a]), g.theta_center(labels[e.b]));
    return data + smooth;
}

DiscreteSolution brute_force(const DiscreteInstance& inst) {
    const auto& g = inst.grid;
    const std::size_t nv = g.num_voxels();
    const std::size_t nt = g.n_theta();
    double count = std::pow(static_cast<double>(nt), static_cast<double>(nv));
    if (count > static_cast<double>(kMaxExhaustiveLabelings))
        throw std::invalid_argument("instance too large for exhaustive search: " + std::to_string(nt) + "^" +
                                    std::to_string(nv) + " labelings");

    Labeling cur(nv, 0);
    DiscreteSolution best{cur, discrete_energy(cur, inst)};
    for (;;) {
        // odometer increment, last voxel least significant
        std::size_t pos = nv;
        while (pos > 0) {
            --pos;
            if (++cur[pos] < nt) break;
            cur[pos] = 0;
            if (pos == 0) return best;
        }
        const double e = discrete_energy(cur, inst);
        if (e < best.energy - tie_slack(best.energy)) best = {cur, e};
    }
}

DiscreteSolution chain_dp(const DiscreteInstance& inst) {
    const auto& g = inst.grid;
    const std::size_t nv = g.num_voxels();
    const std::size_t nt = g.n_theta();
    const auto nontrivial = std::count_if(g.spatial_dims().begin(), g.spatial_dims().end(),
                                          [](std::size_t d) { return d > 1; });
    if (nontrivial > 1) throw std::invalid_argument("chain_dp needs a 1D chain of voxels");

    // with at most one axis longer than 1, consecutive voxel indices are neighbours
    std::vector<double> w(nv > 0 ? nv - 1 : 0, 0.0);
    for (const auto& e : inst.edges) {
        const std::size_t lo = std::min(e.a, e.b), hi = std::max(e.a, e.b);
        if (hi != lo + 1) throw std::invalid_argument("chain_dp: edge is not between chain neighbours");
        w[lo] += e.weight;
    }

    std::vector<double> dist(nt * nt);
    for (std::size_t l = 0; l < nt; ++l)
        for (std::size_t m = 0; m < nt; ++m) dist[l * nt + m] = cyclic_distance(g.theta_center(l), g.theta_center(m));

    // togo[i][l]: best cost of voxels i..nv-1 given label l at voxel i
    std::vector<std::vector<double>> togo(nv, std::vector<double>(nt));
    for (std::size_t l = 0; l < nt; ++l) togo[nv - 1][l] = inst.D.at(nv - 1, l);
    for (std::size_t i = nv - 1; i-- > 0;) {
        for (std::size_t l = 0; l < nt; ++l) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < nt; ++m) best = std::min(best, w[i] * dist[l * nt + m] + togo[i + 1][m]);
            togo[i][l] = inst.D.at(i, l) + best;
        }
    }

    Labeling labels(nv);
    const double opt = *std::min_element(togo[0].begin(), togo[0].end());
    for (std::size_t l = 0; l < nt; ++l) {
        if (togo[0][l] <= opt + tie_slack(opt)) {
            labels[0] = l;
            break;
        }
    }
    for (std::size_t i = 0; i + 1 < nv; ++i) {
        const std::size_t l = labels[i];
        double rest = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < nt; ++m) rest = std::min(rest, w[i] * dist[l * nt + m] + togo[i + 1][m]);
        for (std::size_t m = 0; m < nt; ++m) {
            if (w[i] * dist[l * nt + m] + togo[i + 1][m] <= rest + tie_slack(rest)) {
                labels[i + 1] = m;
                break;
            }
        }
    }
    return DiscreteSolution{labels, discrete_energy(labels, inst)};
}

SpatialField labels_to_angles(const Labeling& labels, const CylinderGrid& grid) {
    SpatialField out(grid);
    for (std::size_t v = 0; v < labels.size(); ++v) out[v] = grid.theta_center(labels.at(v));
    return out;
}

Labeling angles_to_labels(const SpatialField& angles) {
    Labeling out(angles.size());
    for (std::size_t v = 0; v < angles.size(); ++v) out[v] = angles.grid().nearest_bin(angles[v]);
    return out;
}

} // namespace cmf
