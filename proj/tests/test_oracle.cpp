#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "cmf/data_term.hpp"
#include "cmf/oracle.hpp"
#include "test_util.hpp"

using namespace cmf;

namespace {

// L1 data term of bin-centre observations.
CyclicField bin_data(const CylinderGrid& g, const std::vector<std::size_t>& obs_bins) {
    SpatialField a(g), w(g, 1.0);
    for (std::size_t v = 0; v < obs_bins.size(); ++v) a[v] = g.theta_center(obs_bins[v]);
    return build_data_term(make_observation(g, a, w));
}

// Recursive enumeration, independent of brute_force's odometer.
double enumerate_min(const DiscreteInstance& inst) {
    Labeling cur(inst.grid.num_voxels());
    double best = INFINITY;
    std::function<void(std::size_t)> rec = [&](std::size_t v) {
        if (v == cur.size()) {
            best = std::min(best, discrete_energy(cur, inst));
            return;
        }
        for (std::size_t k = 0; k < inst.grid.n_theta(); ++k) {
            cur[v] = k;
            rec(v + 1);
        }
    };
    rec(0);
    return best;
}

} // namespace

TEST_CASE("instance edges") {
    const auto inst = make_instance(CyclicField(make_grid({2, 3}, 4)), 0.5);
    CHECK(inst.edges.size() == 7);
    for (const auto& e : inst.edges) {
        CHECK(e.weight == 0.5);
        CHECK(e.a < e.b);
    }
    CHECK(make_instance(CyclicField(make_grid({5}, 4)), 1.0).edges.size() == 4);
    CHECK(make_instance(CyclicField(make_grid({2, 2, 2}, 4)), 1.0).edges.size() == 12);
    CHECK_THROWS_AS(make_instance(CyclicField(make_grid({2}, 4)), -1.0), std::invalid_argument);
}

TEST_CASE("discrete energy by hand") {
    const auto g = make_grid({3}, 4); // dtheta = pi/2
    CyclicField D(g);
    D.at(0, 1) = 0.5;
    D.at(1, 3) = 0.25;
    D.at(2, 3) = 2.0;
    const auto inst = make_instance(D, 2.0);
    // labels 1,3,3: data 0.5 + 0.25 + 2, edges 2 * pi + 2 * 0
    CHECK(discrete_energy({1, 3, 3}, inst) == doctest::Approx(2.75 + 2 * M_PI));
    // labels 0,3,0: 0 + 0.25 + 0, edges wrap: 2 * pi/2 + 2 * pi/2
    CHECK(discrete_energy({0, 3, 0}, inst) == doctest::Approx(0.25 + 2 * M_PI));
    CHECK_THROWS_AS(discrete_energy({0, 1}, inst), std::invalid_argument);
    CHECK_THROWS_AS(discrete_energy({0, 1, 4}, inst), std::invalid_argument);
}

TEST_CASE("edge weight for a smoothness value") {
    const auto g = make_grid({6}, 8);
    CHECK(edge_weight_for_smoothness(0.45, g) == doctest::Approx(std::sqrt(2.0) * 0.45 / (M_PI / 4)));
    CHECK(edge_weight_for_smoothness(0.0, g) == 0.0);
}

TEST_CASE("regression: six voxels, eight bins") {
    // reference value from a separate exhaustive enumeration
    const auto g = make_grid({6}, 8);
    const auto inst = make_instance(bin_data(g, {1, 2, 1, 5, 6, 4}), edge_weight_for_smoothness(0.45, g));
    const auto bf = brute_force(inst);
    CHECK(bf.energy == doctest::Approx(4.752776842134361).epsilon(1e-12));
    CHECK(bf.labels == Labeling{1, 1, 1, 5, 5, 4});
    const auto dp = chain_dp(inst);
    CHECK(dp.labels == bf.labels);
    CHECK(dp.energy == bf.energy);
}

TEST_CASE("brute force equals chain DP on random chains") {
    std::mt19937_64 rng(81);
    std::uniform_int_distribution<int> len(1, 6), bins(2, 8);
    for (int t = 0; t < 40; ++t) {
        const int n = len(rng);
        const auto g = t % 3 == 0 ? make_grid({1, n}, bins(rng)) : make_grid({n}, bins(rng));
        const auto D = testing::random_cyclic(g, rng, 0.0, 2.0);
        const auto inst = make_instance(D, std::uniform_real_distribution<double>(0.0, 1.5)(rng));
        const auto bf = brute_force(inst);
        const auto dp = chain_dp(inst);
        CHECK(bf.labels == dp.labels);
        CHECK(bf.energy == dp.energy);
        CHECK(bf.energy == doctest::Approx(enumerate_min(inst)).epsilon(1e-12));
    }
}

TEST_CASE("brute force on a 2D grid") {
    std::mt19937_64 rng(83);
    const auto g = make_grid({2, 3}, 5);
    const auto inst = make_instance(testing::random_cyclic(g, rng, 0.0, 2.0), 0.3);
    CHECK(brute_force(inst).energy == doctest::Approx(enumerate_min(inst)).epsilon(1e-12));
    CHECK_THROWS_AS(chain_dp(inst), std::invalid_argument);
}

TEST_CASE("ties resolve to the lowest labelling") {
    const auto g = make_grid({3}, 4);
    const auto inst = make_instance(CyclicField(g, 1.0), 0.7);
    const auto bf = brute_force(inst);
    CHECK(bf.labels == Labeling{0, 0, 0});
    CHECK(chain_dp(inst).labels == Labeling{0, 0, 0});
    // zero weights: every voxel independently picks argmin D, lowest on ties
    CyclicField D(g, std::vector<double>{1, 0, 0, 1, 5, 5, 5, 5, 2, 1, 1, 1});
    const auto free = make_instance(D, 0.0);
    CHECK(brute_force(free).labels == Labeling{1, 0, 1});
    CHECK(chain_dp(free).labels == Labeling{1, 0, 1});
}

TEST_CASE("oracle size limits and topology") {
    CHECK_NOTHROW(brute_force(make_instance(CyclicField(make_grid({2, 2}, 4)), 1.0)));
    CHECK_THROWS_AS(brute_force(make_instance(CyclicField(make_grid({9}, 8)), 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(brute_force(make_instance(CyclicField(make_grid({25}, 2)), 1.0)), std::invalid_argument);
    // chain DP on larger chains is fine and matches constant-label reasoning
    const auto g = make_grid({200}, 16);
    const auto dp = chain_dp(make_instance(CyclicField(g, 1.0), 1.0));
    CHECK(dp.energy == 200.0);
    // an irregular edge breaks the chain
    auto inst = make_instance(CyclicField(make_grid({4}, 4)), 1.0);
    inst.edges.push_back({0, 2, 1.0});
    CHECK_THROWS_AS(chain_dp(inst), std::invalid_argument);
}

TEST_CASE("labels and angles convert both ways") {
    const auto g = make_grid({4}, 8);
    const Labeling l{0, 3, 7, 4};
    const auto a = labels_to_angles(l, g);
    CHECK(a[1] == g.theta_center(3));
    CHECK(angles_to_labels(a) == l);
}
