#include "qpat/nonzero.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace qpat;

namespace {

std::shared_ptr<const Mesh> mesh_ptr(int n) {
    return std::make_shared<const Mesh>(build_unit_square_mesh(n));
}

} // namespace

TEST_CASE("linear and constant fields flag everything or nothing") {
    auto mesh = mesh_ptr(6);
    FeFunction lin =
        nodal_interpolate([](double x, double) { return x; }, mesh);
    RegionMask all = nonzero_region({lin}, {1.0, 0.0}, 0.1);
    CHECK(all.area_fraction == doctest::Approx(1.0));
    for (char f : all.flags) CHECK(f == 1);

    FeFunction flat(mesh, 0.37);
    RegionMask none = nonzero_region({flat}, {1.0, 0.0}, 0.1);
    CHECK(none.area_fraction == 0.0);
    for (char f : none.flags) CHECK(f == 0);

    // grad x . (0,1) = 0 everywhere: direction matters.
    RegionMask cross = nonzero_region({lin}, {0.0, 2.0}, 0.1);
    CHECK(cross.area_fraction == 0.0);
}

TEST_CASE("the mask is the union over fields in the chosen direction") {
    auto mesh = mesh_ptr(5);
    FeFunction fx = nodal_interpolate([](double x, double) { return x; }, mesh);
    FeFunction fy = nodal_interpolate([](double, double y) { return y; }, mesh);

    RegionMask x_only = nonzero_region({fx, fy}, {1.0, 0.0}, 0.1);
    RegionMask x_alone = nonzero_region({fx}, {1.0, 0.0}, 0.1);
    REQUIRE(x_only.flags.size() == x_alone.flags.size());
    for (std::size_t t = 0; t < x_only.flags.size(); ++t)
        CHECK(x_only.flags[t] == x_alone.flags[t]);

    // A duplicated field never changes the mask.
    RegionMask dup = nonzero_region({fx, fx, fy}, {1.0, 0.0}, 0.1);
    for (std::size_t t = 0; t < dup.flags.size(); ++t)
        CHECK(dup.flags[t] == x_only.flags[t]);
}

TEST_CASE("threshold scaling: scaling fields and C0 together is neutral") {
    auto mesh = mesh_ptr(8);
    FeFunction w = nodal_interpolate(
        [](double x, double y) {
            return std::sin(2.0 * x) * std::cos(1.5 * y) + 0.3 * x;
        },
        mesh);
    RegionMask base = nonzero_region({w}, {1.0, 0.0}, 0.25);
    FeFunction w5 = w;
    for (double& v : w5.values) v *= 5.0;
    RegionMask scaled = nonzero_region({w5}, {1.0, 0.0}, 1.25);
    for (std::size_t t = 0; t < base.flags.size(); ++t)
        CHECK(base.flags[t] == scaled.flags[t]);

    // Raising the threshold can only shrink the region.
    RegionMask strict = nonzero_region({w}, {1.0, 0.0}, 0.5);
    for (std::size_t t = 0; t < base.flags.size(); ++t)
        if (strict.flags[t]) CHECK(base.flags[t]);
    CHECK(strict.area_fraction <= base.area_fraction);
}

TEST_CASE("area fraction matches a direct triangle count") {
    auto mesh = mesh_ptr(4);
    // Ramp-then-plateau in x with the kink on a grid line: the 16 triangles
    // in the two cell columns left of x=0.5 carry slope 1, the other 16 are
    // flat. No element straddles the kink.
    FeFunction w = nodal_interpolate(
        [](double x, double) { return x < 0.5 ? x : 0.5; }, mesh);
    RegionMask m = nonzero_region({w}, {1.0, 0.0}, 0.9);
    int flagged = 0;
    for (std::size_t t = 0; t < m.flags.size(); ++t) {
        flagged += m.flags[t];
        bool left = mesh->barycenter(static_cast<int>(t))[0] < 0.5;
        CHECK(static_cast<bool>(m.flags[t]) == left);
    }
    CHECK(flagged == 16);
    CHECK(m.area_fraction == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("growth curve is monotone and equals prefix evaluation") {
    auto mesh = mesh_ptr(10);
    std::vector<FeFunction> ws;
    ws.push_back(nodal_interpolate(
        [](double x, double y) { return std::sin(3.0 * x) * y; }, mesh));
    ws.push_back(nodal_interpolate(
        [](double x, double y) { return std::cos(2.0 * y) + 0.2 * x; }, mesh));
    ws.push_back(nodal_interpolate(
        [](double x, double y) { return x * y; }, mesh));

    std::vector<double> curve = region_growth_curve(ws, {1.0, 0.0}, 0.3);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0] <= curve[1]);
    CHECK(curve[1] <= curve[2]);
    for (std::size_t l = 0; l < 3; ++l) {
        std::vector<FeFunction> prefix(ws.begin(), ws.begin() + l + 1);
        CHECK(curve[l] ==
              nonzero_region(prefix, {1.0, 0.0}, 0.3).area_fraction);
    }

    // Per-triangle monotonicity, not just the scalar fraction.
    RegionMask m1 = nonzero_region({ws[0]}, {1.0, 0.0}, 0.3);
    RegionMask m3 = nonzero_region(ws, {1.0, 0.0}, 0.3);
    for (std::size_t t = 0; t < m1.flags.size(); ++t)
        if (m1.flags[t]) CHECK(m3.flags[t]);
}

TEST_CASE("validating curve rejects malformed or non-nested sets") {
    auto mesh = mesh_ptr(4);
    FeFunction a = nodal_interpolate([](double x, double) { return x; }, mesh);
    FeFunction b = nodal_interpolate([](double, double y) { return y; }, mesh);
    FeFunction c = nodal_interpolate(
        [](double x, double y) { return x + y; }, mesh);

    std::vector<std::vector<FeFunction>> good = {{a}, {a, b}};
    std::vector<double> curve = region_growth_curve(good, {1.0, 0.0}, 0.1);
    CHECK(curve.size() == 2);

    std::vector<std::vector<FeFunction>> wrong_count = {{a}, {a, b, c}};
    CHECK_THROWS_AS(region_growth_curve(wrong_count, {1.0, 0.0}, 0.1),
                    std::invalid_argument);

    std::vector<std::vector<FeFunction>> not_nested = {{a}, {c, b}};
    CHECK_THROWS_AS(region_growth_curve(not_nested, {1.0, 0.0}, 0.1),
                    std::invalid_argument);

    CHECK_THROWS_AS(region_growth_curve(
                        std::vector<std::vector<FeFunction>>{}, {1.0, 0.0}, 0.1),
                    std::invalid_argument);
}

TEST_CASE("input validation: empty fields, zero direction, bad threshold") {
    auto mesh = mesh_ptr(3);
    FeFunction w(mesh, 1.0);
    CHECK_THROWS_AS(nonzero_region({}, {1.0, 0.0}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(nonzero_region({w}, {0.0, 0.0}, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(nonzero_region({w}, {1.0, 0.0}, 0.0),
                    std::invalid_argument);
    FeFunction other(mesh_ptr(4), 1.0);
    CHECK_THROWS_AS(nonzero_region({w, other}, {1.0, 0.0}, 0.1),
                    std::invalid_argument);
}
