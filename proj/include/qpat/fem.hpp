#pragma once

// P1 finite elements on the structured meshes of mesh.hpp: assembly of
// stiffness and mass forms with piecewise-linear coefficients, Dirichlet
// solves by condensation, nodal interpolation, per-element gradients, exact
// norms of P1 fields, and nodal transfer between nested meshes.
//
// Quadrature policy: the stiffness coefficient enters through its element
// mean (exact, gradients are constant per element); the mass form uses the
// closed-form integral of a product of three P1 factors. Both are exact, so
// rate studies see pure discretization error.

#include "qpat/mesh.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace qpat {

struct FeFunction {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;

    FeFunction() = default;
    FeFunction(std::shared_ptr<const Mesh> m, std::vector<double> v)
        : mesh(std::move(m)), values(std::move(v)) {}
    explicit FeFunction(std::shared_ptr<const Mesh> m, double fill = 0.0)
        : mesh(std::move(m)),
          values(mesh ? mesh->node_count() : 0, fill) {}
};

struct SparseSymMatrix {
    int dim = 0;
    std::vector<int> row_ptr;   // size dim+1
    std::vector<int> col_idx;   // ascending within each row
    std::vector<double> vals;

    // y = A x
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> diagonal() const;
    double coeff(int i, int j) const;   // 0 if outside the pattern
};

enum class SolverKind { pcg, dense };

struct DirichletSolve {
    FeFunction u;
    int iterations = 0;       // CG iterations (0 on the dense path)
    bool converged = true;
    bool dense_fallback = false;
    double rel_residual = 0.0;
};

// Stiffness: (i,j) entry = sum_T |T| qbar_T grad(phi_i).grad(phi_j) with
// qbar_T the mean of q over the vertices of T.
SparseSymMatrix assemble_stiffness(const Mesh& mesh, const FeFunction& q);

// Mass: (i,j) entry = sum_T integral_T sigma_h phi_i phi_j, exact for P1
// sigma_h.
SparseSymMatrix assemble_mass(const Mesh& mesh, const FeFunction& sigma);

// Load vector (f_h, phi_i) for a P1 density f_h, i.e. the mass matrix with
// unit coefficient applied to f's nodal values.
std::vector<double> assemble_load(const Mesh& mesh, const FeFunction& f);

// Solve A u = rhs with u fixed to boundary_values on the boundary nodes of
// the mesh (condensation: boundary rows are eliminated, known values moved to
// the right-hand side). boundary_values is a full-length nodal vector; only
// its boundary entries are read. The pcg path runs Jacobi-preconditioned CG
// to relative residual 1e-10 with an iteration cap of 20*node count, falling
// back to the dense path (node counts <= 2000) if the cap is hit. The dense
// path is an Eigen LLT factorization of the condensed system and serves as
// the oracle route.
DirichletSolve solve_dirichlet(const SparseSymMatrix& A,
                               const std::vector<double>& rhs,
                               const std::vector<double>& boundary_values,
                               const std::shared_ptr<const Mesh>& mesh,
                               SolverKind kind = SolverKind::pcg);

// Nodal (Lagrange) interpolation of f; rejects non-finite samples.
FeFunction nodal_interpolate(const std::function<double(double, double)>& f,
                             const std::shared_ptr<const Mesh>& mesh);

// Constant gradient of the P1 field on each triangle.
std::vector<std::array<double, 2>> element_gradient(const FeFunction& u);

// Exact ||u||_L2 and |u|_H1 of the P1 field.
double l2_norm(const FeFunction& u);
double h1_seminorm(const FeFunction& u);

// Copy nodal values from a fine mesh onto a coarse mesh whose nodes are a
// subset of the fine nodes; requires fine n to be a multiple of coarse n.
FeFunction transfer_fine_to_coarse(const FeFunction& u_fine,
                                   const std::shared_ptr<const Mesh>& coarse);

// L2 distance between a P1 field and a closed-form reference, by the 3-point
// edge-midpoint rule per element (exact for quadratics). Independent of the
// mass-matrix route, which is what the norm tests lean on.
double l2_error_midpoint(const FeFunction& u,
                         const std::function<double(double, double)>& ref);

} // namespace qpat
