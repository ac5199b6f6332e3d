#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <random>

#include "cmf/field_io.hpp"
#include "cmf/grid.hpp"
#include "test_util.hpp"

using namespace cmf;
using std::numbers::pi;

TEST_CASE("make_grid shape and layout") {
    const auto g = make_grid({3, 4}, 8);
    CHECK(g.num_axes() == 2);
    CHECK(g.num_voxels() == 12);
    CHECK(g.num_nodes() == 96);
    CHECK(g.delta_theta() == doctest::Approx(pi / 4).epsilon(1e-15));
    CHECK(g.voxel_stride(0) == 4);
    CHECK(g.voxel_stride(1) == 1);
    CHECK(g.node(5, 3) == 43);

    const auto g3 = make_grid({2, 3, 4}, 2);
    CHECK(g3.voxel_stride(0) == 12);
    CHECK(g3.voxel_stride(1) == 4);
    CHECK(g3.voxel_stride(2) == 1);
}

TEST_CASE("make_grid rejects bad shapes") {
    CHECK_THROWS_AS(make_grid(std::vector<long long>{}, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({1, 2, 3, 4}, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({4, 0}, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({-3}, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({4}, 1), std::invalid_argument);
    CHECK_NOTHROW(make_grid({1}, 2));
}

TEST_CASE("bin centres cover [-pi, pi)") {
    const auto g = make_grid({1}, 8);
    CHECK(g.theta_center(0) == doctest::Approx(-pi + pi / 8));
    CHECK(g.theta_center(7) == doctest::Approx(pi - pi / 8));
    for (std::size_t k = 0; k < 8; ++k) CHECK(g.nearest_bin(g.theta_center(k)) == k);
    CHECK(g.nearest_bin(-pi + 0.01) == 0);
    CHECK(g.nearest_bin(pi - 0.01) == 7);
    CHECK(g.nearest_bin(3 * pi / 8 + 4 * pi) == g.nearest_bin(3 * pi / 8));
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(pi) == doctest::Approx(-pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(-pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(-5 * pi / 2) == doctest::Approx(-pi / 2));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-50, 50);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(d(rng));
        CHECK(w >= -pi);
        CHECK(w < pi);
    }
}

TEST_CASE("uniform indicator integrates to one") {
    for (long long n : {2, 3, 8, 32, 100}) {
        const auto g = make_grid({3, 2}, n);
        const auto u = uniform_indicator(g);
        CHECK(u[0] == doctest::Approx(1.0 / (2 * pi)));
        const auto s = integrate_theta(u);
        for (double v : s.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("theta_sum does not depend on the starting bin") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> bins(1 + trial % 40);
        for (auto& b : bins) b = d(rng) * std::pow(10.0, (trial % 7) - 3);
        const double ref = theta_sum(bins);
        for (std::size_t r = 1; r < bins.size(); ++r) {
            std::rotate(bins.begin(), bins.begin() + 1, bins.end());
            CHECK(theta_sum(bins) == ref);
        }
    }
    // larger than the stack buffer
    std::vector<double> big(300);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = 1.0 / (1.0 + i);
    const double ref = theta_sum(big);
    std::rotate(big.begin(), big.begin() + 123, big.end());
    CHECK(theta_sum(big) == ref);
}

TEST_CASE("rotate_theta moves bin k to k + shift") {
    const auto g = make_grid({2}, 4);
    CyclicField f(g, std::vector<double>{0, 1, 2, 3, 10, 11, 12, 13});
    const auto r = rotate_theta(f, 1);
    CHECK(std::vector<double>(r.values().begin(), r.values().end()) == std::vector<double>{3, 0, 1, 2, 13, 10, 11, 12});
    CHECK(rotate_theta(f, -1) == rotate_theta(f, 3));
    CHECK(rotate_theta(f, 4) == f);
    CHECK(rotate_theta(rotate_theta(f, 3), 1) == f);
}

TEST_CASE("field constructors validate sizes") {
    const auto g = make_grid({2, 2}, 3);
    CHECK_THROWS_AS(CyclicField(g, std::vector<double>(11)), std::invalid_argument);
    CHECK_THROWS_AS(SpatialField(g, std::vector<double>(3)), std::invalid_argument);
    CHECK_NOTHROW(CyclicField(g, std::vector<double>(12)));
    FlowField q(g);
    CHECK(q.num_components() == 3);
    CHECK(q.theta_axis() == 2);
    q.component(0)[5] = 3.0;
    q.component(2)[5] = 4.0;
    CHECK(q.node_norm(5) == 5.0);
    CHECK(q.node_norm(4) == 0.0);
}

TEST_CASE("field files round-trip bit-exactly") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        const auto g = testing::random_grid(rng);
        auto c = testing::random_cyclic(g, rng, -1e300, 1e300);
        c[0] = -0.0;
        c[c.size() - 1] = 4.9e-324;
        const auto back = decode_cyclic(encode_field(c));
        CHECK(back.grid() == g);
        CHECK(std::memcmp(back.values().data(), c.values().data(), c.size() * 8) == 0);

        SpatialField s(g);
        for (auto& v : s.values()) v = std::uniform_real_distribution<double>(-5, 5)(rng);
        CHECK(decode_spatial(encode_field(s)) == s);

        const auto q = testing::random_flow(g, rng);
        CHECK(decode_flow(encode_field(q)) == q);
    }
}

TEST_CASE("field header layout") {
    const auto g = make_grid({3, 5}, 7);
    const auto bytes = encode_field(CyclicField(g, 1.5));
    REQUIRE(bytes.size() == 24 + 8 + 105 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CYMF");
    auto u32 = [&](std::size_t at) {
        return bytes[at] | (bytes[at + 1] << 8) | (bytes[at + 2] << 16) | (std::uint32_t(bytes[at + 3]) << 24);
    };
    CHECK(u32(4) == 1);
    CHECK(u32(8) == 2);
    CHECK(u32(12) == 2);
    CHECK(u32(16) == 3);
    CHECK(u32(20) == 5);
    CHECK(u32(24) == 7);
    CHECK(u32(28) == 1);
    // 1.5 = 0x3FF8000000000000, little-endian
    CHECK(bytes[32 + 6] == 0xF8);
    CHECK(bytes[32 + 7] == 0x3F);
}

TEST_CASE("malformed field files name the byte offset") {
    const auto g = make_grid({4}, 3);
    const auto bytes = encode_field(CyclicField(g, 2.0));
    const std::size_t payload = 28;

    auto offset_of = [](const std::vector<std::uint8_t>& b) -> std::size_t {
        try {
            decode_cyclic(b);
        } catch (const FormatError& e) {
            return e.offset();
        }
        return SIZE_MAX;
    };

    auto cut = bytes;
    cut.resize(payload + 3 * 8 + 5); // 3 values and part of a fourth
    CHECK(offset_of(cut) == payload + 24);

    cut.resize(10);
    CHECK(offset_of(cut) == 10);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK(offset_of(bad) == 0);

    bad = bytes;
    bad[4] = 9;
    CHECK(offset_of(bad) == 4);

    bad = bytes;
    bad.push_back(0);
    CHECK(offset_of(bad) == bytes.size());

    bad = bytes;
    for (int i = 0; i < 8; ++i) bad[payload + 16 + i] = 0xFF; // third value becomes NaN
    CHECK(offset_of(bad) == payload + 16);

    // spatial file read as cyclic
    CHECK(offset_of(encode_field(SpatialField(g))) == 8);
}
