#include "qpat/fem.hpp"

#include "qpat/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

using namespace qpat;

namespace {

std::shared_ptr<const Mesh> mesh_ptr(int n) {
    return std::make_shared<const Mesh>(build_unit_square_mesh(n));
}

// Degree-5 Gauss rule on a triangle (7 points), used as an independent
// quadrature oracle for the closed-form mass integrals.
double gauss7_integral(const Mesh& mesh, int t,
                       const std::function<double(double, double)>& f) {
    static const double w[7] = {0.225,
                                0.13239415278850618, 0.13239415278850618,
                                0.13239415278850618, 0.12593918054482715,
                                0.12593918054482715, 0.12593918054482715};
    static const double a = 0.4701420641051151, b = 0.10128650732345634;
    static const double bc[7][3] = {
        {1.0 / 3, 1.0 / 3, 1.0 / 3},
        {a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
        {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
    const auto& tri = mesh.triangles[t];
    double s = 0.0;
    for (int p = 0; p < 7; ++p) {
        double x = 0.0, y = 0.0;
        for (int v = 0; v < 3; ++v) {
            x += bc[p][v] * mesh.nodes[tri[v]][0];
            y += bc[p][v] * mesh.nodes[tri[v]][1];
        }
        s += w[p] * f(x, y);
    }
    return s * signed_area(mesh, t);
}

// P1 barycentric basis value of local vertex v at (x, y) inside triangle t.
double p1_basis(const Mesh& mesh, int t, int v, double x, double y) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.nodes[tri[0]];
    const auto& p1 = mesh.nodes[tri[1]];
    const auto& p2 = mesh.nodes[tri[2]];
    double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                 (p2[0] - p0[0]) * (p1[1] - p0[1]);
    double l1 = ((x - p0[0]) * (p2[1] - p0[1]) -
                 (p2[0] - p0[0]) * (y - p0[1])) / det;
    double l2 = ((p1[0] - p0[0]) * (y - p0[1]) -
                 (x - p0[0]) * (p1[1] - p0[1])) / det;
    double l[3] = {1.0 - l1 - l2, l1, l2};
    return l[v];
}

} // namespace

TEST_CASE("assembled unit-coefficient stiffness on the two-element mesh") {
    // Hand-assembled oracle for n=1, nodes 0:(0,0) 1:(1,0) 2:(0,1) 3:(1,1),
    // triangles {0,1,3} and {0,3,2}. Each triangle contributes the reference
    // local matrix 1/2 [[2,-1,-1],[-1,1,0],[-1,0,1]] in the order
    // (right-angle corner, leg endpoints).
    auto mesh = mesh_ptr(1);
    FeFunction one(mesh, 1.0);
    SparseSymMatrix A = assemble_stiffness(*mesh, one);

    CHECK(A.coeff(0, 0) == doctest::Approx(1.0));
    CHECK(A.coeff(0, 1) == doctest::Approx(-0.5));
    CHECK(A.coeff(0, 2) == doctest::Approx(-0.5));
    CHECK(A.coeff(0, 3) == doctest::Approx(0.0));
    CHECK(A.coeff(1, 1) == doctest::Approx(1.0));   // right angle of {0,1,3}
    CHECK(A.coeff(1, 3) == doctest::Approx(-0.5));
    CHECK(A.coeff(2, 2) == doctest::Approx(1.0));   // right angle of {0,3,2}
    CHECK(A.coeff(2, 3) == doctest::Approx(-0.5));
    CHECK(A.coeff(3, 3) == doctest::Approx(1.0));

    for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) row += A.coeff(i, j);
        CHECK(std::abs(row) <= 1e-14);
    }
}

TEST_CASE("stiffness is linear in the coefficient and an M-matrix for q=1") {
    auto mesh = mesh_ptr(6);
    FeFunction one(mesh, 1.0);
    FeFunction two(mesh, 2.0);
    SparseSymMatrix A1 = assemble_stiffness(*mesh, one);
    SparseSymMatrix A2 = assemble_stiffness(*mesh, two);
    REQUIRE(A1.vals.size() == A2.vals.size());
    for (std::size_t p = 0; p < A1.vals.size(); ++p)
        CHECK(A2.vals[p] == doctest::Approx(2.0 * A1.vals[p]).epsilon(1e-14));

    // Zero row sums and non-positive off-diagonals.
    for (int i = 0; i < A1.dim; ++i) {
        double row = 0.0;
        for (int p = A1.row_ptr[i]; p < A1.row_ptr[i + 1]; ++p) {
            row += A1.vals[p];
            if (A1.col_idx[p] != i) CHECK(A1.vals[p] <= 1e-14);
        }
        CHECK(std::abs(row) <= 1e-12);
    }

    // Symmetry within 1e-12.
    for (int i = 0; i < A1.dim; ++i)
        for (int p = A1.row_ptr[i]; p < A1.row_ptr[i + 1]; ++p)
            CHECK(std::abs(A1.vals[p] - A1.coeff(A1.col_idx[p], i)) <= 1e-12);
}

TEST_CASE("mass matrix: totals, zero coefficient, and the reference element") {
    auto mesh = mesh_ptr(5);
    FeFunction one(mesh, 1.0);
    SparseSymMatrix M = assemble_mass(*mesh, one);
    double total = 0.0;
    for (double v : M.vals) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    FeFunction zero(mesh, 0.0);
    SparseSymMatrix M0 = assemble_mass(*mesh, zero);
    for (double v : M0.vals) CHECK(v == 0.0);

    // Single reference triangle: local (|T|/12) [[2,1,1],[1,2,1],[1,1,2]].
    // On the n=1 mesh nodes 0,1 share one triangle, nodes 0,3 share two.
    auto m1 = mesh_ptr(1);
    FeFunction one1(m1, 1.0);
    SparseSymMatrix M1 = assemble_mass(*m1, one1);
    const double A = 0.5;
    CHECK(M1.coeff(0, 1) == doctest::Approx(A / 12.0));
    CHECK(M1.coeff(0, 3) == doctest::Approx(2.0 * A / 12.0));
    CHECK(M1.coeff(1, 1) == doctest::Approx(2.0 * A / 12.0));
    CHECK(M1.coeff(0, 0) == doctest::Approx(4.0 * A / 12.0));
}

TEST_CASE("mass assembly with P1 coefficient matches Gauss quadrature") {
    auto mesh = mesh_ptr(2);
    SplitMix64 rng(99);
    FeFunction sigma(mesh, 0.0);
    for (double& v : sigma.values) v = 0.5 + rng.uniform01();
    SparseSymMatrix M = assemble_mass(*mesh, sigma);

    // Rebuild a handful of entries by numerical quadrature of
    // sigma_h phi_i phi_j over the shared triangles.
    auto sigma_at = [&](int t, double x, double y) {
        const auto& tri = mesh->triangles[t];
        double s = 0.0;
        for (int v = 0; v < 3; ++v)
            s += sigma.values[tri[v]] * p1_basis(*mesh, t, v, x, y);
        return s;
    };
    for (int i : {0, 4, 7}) {
        for (int p = M.row_ptr[i]; p < M.row_ptr[i + 1]; ++p) {
            int j = M.col_idx[p];
            double oracle = 0.0;
            for (int t = 0; t < mesh->tri_count(); ++t) {
                const auto& tri = mesh->triangles[t];
                int li = -1, lj = -1;
                for (int v = 0; v < 3; ++v) {
                    if (tri[v] == i) li = v;
                    if (tri[v] == j) lj = v;
                }
                if (li < 0 || lj < 0) continue;
                oracle += gauss7_integral(*mesh, t, [&](double x, double y) {
                    return sigma_at(t, x, y) * p1_basis(*mesh, t, li, x, y) *
                           p1_basis(*mesh, t, lj, x, y);
                });
            }
            CHECK(M.vals[p] == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("Dirichlet solve reproduces affine fields exactly") {
    auto mesh = mesh_ptr(7);
    FeFunction one(mesh, 1.0);
    SparseSymMatrix A = assemble_stiffness(*mesh, one);
    std::vector<double> rhs(mesh->node_count(), 0.0);

    FeFunction g = nodal_interpolate([](double x, double) { return x; }, mesh);
    DirichletSolve sol = solve_dirichlet(A, rhs, g.values, mesh);
    CHECK(sol.converged);
    for (int i = 0; i < mesh->node_count(); ++i)
        CHECK(std::abs(sol.u.values[i] - mesh->nodes[i][0]) <= 1e-10);

    std::vector<double> zero_bc(mesh->node_count(), 0.0);
    DirichletSolve z = solve_dirichlet(A, rhs, zero_bc, mesh);
    for (double v : z.u.values) CHECK(v == 0.0);
}

TEST_CASE("CG agrees with the dense factorization on random data") {
    auto mesh = mesh_ptr(8);
    SplitMix64 rng = substream(7, 3);
    FeFunction q(mesh, 0.0), sigma(mesh, 0.0);
    for (double& v : q.values) v = 0.5 + 1.5 * rng.uniform01();
    for (double& v : sigma.values) v = 0.5 + 1.5 * rng.uniform01();
    SparseSymMatrix A = assemble_stiffness(*mesh, q);
    SparseSymMatrix Ms = assemble_mass(*mesh, sigma);
    for (std::size_t p = 0; p < A.vals.size(); ++p) A.vals[p] += Ms.vals[p];

    std::vector<double> rhs(mesh->node_count()), bc(mesh->node_count());
    for (double& v : rhs) v = rng.normal();
    for (double& v : bc) v = rng.normal();

    FeFunction u_cg = solve_dirichlet(A, rhs, bc, mesh, SolverKind::pcg).u;
    FeFunction u_dn = solve_dirichlet(A, rhs, bc, mesh, SolverKind::dense).u;
    double max_diff = 0.0;
    for (int i = 0; i < mesh->node_count(); ++i)
        max_diff = std::max(max_diff,
                            std::abs(u_cg.values[i] - u_dn.values[i]));
    CHECK(max_diff <= 1e-8);
}

TEST_CASE("nodal interpolation: affine exactness and O(h^2) decay") {
    auto mesh = mesh_ptr(6);
    FeFunction aff =
        nodal_interpolate([](double x, double y) { return x + y; }, mesh);
    CHECK(l2_error_midpoint(aff, [](double x, double y) { return x + y; }) <=
          1e-14);

    FeFunction c = nodal_interpolate([](double, double) { return 2.5; }, mesh);
    for (double v : c.values) CHECK(v == 2.5);

    auto sq = [](double x, double) { return x * x; };
    double e8 = l2_error_midpoint(nodal_interpolate(sq, mesh_ptr(8)), sq);
    double e16 = l2_error_midpoint(nodal_interpolate(sq, mesh_ptr(16)), sq);
    CHECK(e8 / e16 == doctest::Approx(4.0).epsilon(0.15));

    CHECK_THROWS_AS(nodal_interpolate(
                        [](double x, double) { return 1.0 / x; }, mesh),
                    std::domain_error);
}

TEST_CASE("element gradients of affine fields are exact") {
    auto mesh = mesh_ptr(5);
    auto gx = element_gradient(
        nodal_interpolate([](double x, double) { return x; }, mesh));
    for (const auto& g : gx) {
        CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(g[1]) <= 1e-13);
    }
    auto gc = element_gradient(FeFunction(mesh, 3.7));
    for (const auto& g : gc) {
        CHECK(std::abs(g[0]) <= 1e-13);
        CHECK(std::abs(g[1]) <= 1e-13);
    }
    auto gl = element_gradient(nodal_interpolate(
        [](double x, double y) { return 3.0 * x - 2.0 * y; }, mesh));
    for (const auto& g : gl) {
        CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-13));
        CHECK(g[1] == doctest::Approx(-2.0).epsilon(1e-13));
    }
}

TEST_CASE("norms of simple fields") {
    auto mesh = mesh_ptr(9);
    FeFunction one(mesh, 1.0);
    CHECK(l2_norm(one) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(h1_seminorm(one) <= 1e-13);

    FeFunction x = nodal_interpolate([](double x, double) { return x; }, mesh);
    CHECK(h1_seminorm(x) == doctest::Approx(1.0).epsilon(1e-13));
    // integral of x^2 over the square is 1/3; exact for the P1 quadrature
    // since x is itself P1 here.
    CHECK(std::abs(l2_norm(x) - 1.0 / std::sqrt(3.0)) <= 1e-12);
}

TEST_CASE("nodal transfer between nested meshes") {
    auto fine = mesh_ptr(16);
    auto coarse = mesh_ptr(8);
    FeFunction cf(fine, 4.25);
    FeFunction cc = transfer_fine_to_coarse(cf, coarse);
    for (double v : cc.values) CHECK(v == 4.25);

    auto sq = [](double x, double) { return x * x; };
    FeFunction tf = transfer_fine_to_coarse(nodal_interpolate(sq, fine), coarse);
    FeFunction direct = nodal_interpolate(sq, coarse);
    for (int i = 0; i < coarse->node_count(); ++i)
        CHECK(tf.values[i] == direct.values[i]);

    auto bad = mesh_ptr(12);
    FeFunction fb(bad, 0.0);
    CHECK_THROWS_AS(transfer_fine_to_coarse(fb, coarse), std::invalid_argument);
}

TEST_CASE("discrete maximum principle surrogate for unit boundary data") {
    auto mesh = mesh_ptr(12);
    FeFunction D = nodal_interpolate(
        [](double x, double y) { return 1.5 + 0.5 * std::sin(3.0 * x + y); },
        mesh);
    FeFunction sigma = nodal_interpolate(
        [](double x, double y) { return 2.0 + x + y; }, mesh);
    SparseSymMatrix A = assemble_stiffness(*mesh, D);
    SparseSymMatrix Ms = assemble_mass(*mesh, sigma);
    for (std::size_t p = 0; p < A.vals.size(); ++p) A.vals[p] += Ms.vals[p];
    std::vector<double> rhs(mesh->node_count(), 0.0);
    std::vector<double> ones(mesh->node_count(), 1.0);
    FeFunction u = solve_dirichlet(A, rhs, ones, mesh).u;
    for (double v : u.values) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-8);
    }
}

TEST_CASE("manufactured solution converges at second order on one doubling") {
    auto run = [](int n) {
        auto mesh = mesh_ptr(n);
        FeFunction q =
            nodal_interpolate([](double x, double) { return 1.0 + x; }, mesh);
        FeFunction sigma(mesh, 1.0);
        SparseSymMatrix A = assemble_stiffness(*mesh, q);
        SparseSymMatrix Ms = assemble_mass(*mesh, sigma);
        for (std::size_t p = 0; p < A.vals.size(); ++p) A.vals[p] += Ms.vals[p];
        const double pi = std::acos(-1.0);
        FeFunction f = nodal_interpolate(
            [pi](double x, double y) {
                double sxy = std::sin(pi * x) * std::sin(pi * y);
                return -pi * std::cos(pi * x) * std::sin(pi * y) +
                       (2.0 * pi * pi * (1.0 + x) + 1.0) * sxy;
            },
            mesh);
        std::vector<double> rhs = assemble_load(*mesh, f);
        std::vector<double> zero_bc(mesh->node_count(), 0.0);
        FeFunction u = solve_dirichlet(A, rhs, zero_bc, mesh).u;
        return l2_error_midpoint(u, [pi](double x, double y) {
            return std::sin(pi * x) * std::sin(pi * y);
        });
    };
    double e8 = run(8), e16 = run(16);
    double ratio = e8 / e16;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}
