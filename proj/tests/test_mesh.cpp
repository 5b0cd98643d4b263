#include "qpat/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

using namespace qpat;

TEST_CASE("smallest meshes have forced counts") {
    Mesh m1 = build_unit_square_mesh(1);
    CHECK(m1.node_count() == 4);
    CHECK(m1.tri_count() == 2);
    CHECK(m1.h == 1.0);

    Mesh m2 = build_unit_square_mesh(2);
    CHECK(m2.node_count() == 9);
    CHECK(m2.tri_count() == 8);
    CHECK(m2.boundary_nodes.size() == 8);

    CHECK_THROWS_AS(build_unit_square_mesh(0), std::invalid_argument);
}

TEST_CASE("triangles partition the unit square with positive orientation") {
    for (int n : {1, 3, 4, 7, 16}) {
        Mesh m = build_unit_square_mesh(n);
        REQUIRE(m.node_count() == (n + 1) * (n + 1));
        REQUIRE(m.tri_count() == 2 * n * n);
        double total = 0.0;
        for (int t = 0; t < m.tri_count(); ++t) {
            double a = signed_area(m, t);
            CHECK(a == doctest::Approx(0.5 * m.h * m.h).epsilon(1e-13));
            CHECK(a > 0.0);
            total += a;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("edge incidence: interior edges twice, boundary edges once") {
    Mesh m = build_unit_square_mesh(5);
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}] += 1;
        }
    }
    for (const auto& [edge, count] : edge_count) {
        bool on_boundary = m.is_boundary[edge.first] &&
                           m.is_boundary[edge.second];
        // A chord between two boundary nodes through the interior would be
        // miscounted here, but with h=0.2 no triangle edge connects two
        // boundary nodes except along the boundary itself.
        auto pa = m.nodes[edge.first];
        auto pb = m.nodes[edge.second];
        bool same_side = (pa[0] == pb[0] && (pa[0] == 0.0 || pa[0] == 1.0)) ||
                         (pa[1] == pb[1] && (pa[1] == 0.0 || pa[1] == 1.0));
        if (on_boundary && same_side)
            CHECK(count == 1);
        else
            CHECK(count == 2);
    }
}

TEST_CASE("boundary arc length follows the counter-clockwise parametrization") {
    Mesh m = build_unit_square_mesh(4);
    auto s_at = [&](double x, double y) {
        for (int id : m.boundary_nodes)
            if (m.nodes[id][0] == x && m.nodes[id][1] == y)
                return m.boundary_arclength[id];
        FAIL("boundary node not found");
        return -1.0;
    };
    CHECK(s_at(0.0, 0.0) == 0.0);
    CHECK(s_at(1.0, 0.0) == 1.0);
    CHECK(s_at(1.0, 1.0) == 2.0);
    CHECK(s_at(0.0, 1.0) == 3.0);
    CHECK(s_at(0.5, 0.0) == 0.5);
    CHECK(s_at(1.0, 0.25) == 1.25);
    CHECK(s_at(0.0, 0.5) == 3.5);

    // Distinct values in [0,4), consistent with perimeter 4.
    std::set<double> seen;
    for (auto [id, s] : boundary_arclength(m)) {
        (void)id;
        CHECK(s >= 0.0);
        CHECK(s < 4.0);
        CHECK(seen.insert(s).second);
    }
    CHECK(seen.size() == m.boundary_nodes.size());
}

TEST_CASE("subdomain tagging by barycenter") {
    Mesh m = build_unit_square_mesh(4);
    Mesh all = tag_subdomain(m, [](double, double) { return true; });
    Mesh none = tag_subdomain(m, [](double, double) { return false; });
    int count_all = 0, count_none = 0;
    for (char t : all.subdomain_tags) count_all += t;
    for (char t : none.subdomain_tags) count_none += t;
    CHECK(count_all == 32);
    CHECK(count_none == 0);

    // Independent oracle: count barycenters with x < 0.5 by direct
    // enumeration of all 32 triangles.
    int expected = 0;
    for (int t = 0; t < m.tri_count(); ++t)
        if (m.barycenter(t)[0] < 0.5) ++expected;
    Mesh half = tag_subdomain(m, [](double x, double) { return x < 0.5; });
    int count_half = 0;
    for (char t : half.subdomain_tags) count_half += t;
    CHECK(count_half == expected);
    CHECK(count_half == 16);
}

TEST_CASE("interior subdomain excludes exactly the boundary-touching ring") {
    for (int n : {4, 8}) {
        Mesh m = tag_interior_subdomain(build_unit_square_mesh(n));
        int tagged = 0;
        for (int t = 0; t < m.tri_count(); ++t) {
            bool touches_boundary = false;
            for (int v : m.triangles[t])
                if (m.is_boundary[v]) touches_boundary = true;
            CHECK(int(m.subdomain_tags[t]) == int(!touches_boundary));
            tagged += m.subdomain_tags[t];
        }
        CHECK(tagged == 2 * (n - 2) * (n - 2));
    }
}

TEST_CASE("nested refinement: coarse nodes appear among fine nodes") {
    Mesh coarse = build_unit_square_mesh(4);
    Mesh fine = build_unit_square_mesh(8);
    std::set<std::pair<double, double>> fine_nodes;
    for (const auto& p : fine.nodes) fine_nodes.insert({p[0], p[1]});
    for (const auto& p : coarse.nodes)
        CHECK(fine_nodes.count({p[0], p[1]}) == 1);
}
