#include "qpat/fem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpat {

namespace {

void check_field(const Mesh& mesh, const FeFunction& f, const char* what) {
    if (!f.mesh || f.mesh->node_count() != mesh.node_count() ||
        f.mesh->n != mesh.n)
        throw std::invalid_argument(std::string(what) + ": field mesh mismatch");
    if (static_cast<int>(f.values.size()) != mesh.node_count())
        throw std::invalid_argument(std::string(what) + ": value length mismatch");
    for (double v : f.values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": non-finite value");
}

// Gradient factors of the three P1 basis functions on triangle t:
// grad(phi_i) = (b_i, c_i) / (2 area).
struct TriGeom {
    double b[3], c[3], area;
};

TriGeom tri_geometry(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const double x0 = mesh.nodes[tri[0]][0], y0 = mesh.nodes[tri[0]][1];
    const double x1 = mesh.nodes[tri[1]][0], y1 = mesh.nodes[tri[1]][1];
    const double x2 = mesh.nodes[tri[2]][0], y2 = mesh.nodes[tri[2]][1];
    TriGeom g;
    g.b[0] = y1 - y2; g.b[1] = y2 - y0; g.b[2] = y0 - y1;
    g.c[0] = x2 - x1; g.c[1] = x0 - x2; g.c[2] = x1 - x0;
    g.area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0));
    return g;
}

// CSR skeleton from the node-to-node element adjacency (includes diagonal).
SparseSymMatrix make_pattern(const Mesh& mesh) {
    const int nn = mesh.node_count();
    std::vector<std::vector<int>> adj(nn);
    for (const auto& tri : mesh.triangles)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                adj[tri[a]].push_back(tri[b]);

    SparseSymMatrix A;
    A.dim = nn;
    A.row_ptr.assign(nn + 1, 0);
    for (int i = 0; i < nn; ++i) {
        auto& row = adj[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        A.row_ptr[i + 1] = A.row_ptr[i] + static_cast<int>(row.size());
    }
    A.col_idx.reserve(A.row_ptr[nn]);
    for (int i = 0; i < nn; ++i)
        A.col_idx.insert(A.col_idx.end(), adj[i].begin(), adj[i].end());
    A.vals.assign(A.col_idx.size(), 0.0);
    return A;
}

int pattern_pos(const SparseSymMatrix& A, int i, int j) {
    auto first = A.col_idx.begin() + A.row_ptr[i];
    auto last = A.col_idx.begin() + A.row_ptr[i + 1];
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j)
        throw std::logic_error("sparse pattern lookup miss");
    return static_cast<int>(it - A.col_idx.begin());
}

} // namespace

void SparseSymMatrix::apply(const std::vector<double>& x,
                            std::vector<double>& y) const {
    y.assign(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            s += vals[p] * x[col_idx[p]];
        y[i] = s;
    }
}

std::vector<double> SparseSymMatrix::diagonal() const {
    std::vector<double> d(dim, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            if (col_idx[p] == i) d[i] = vals[p];
    return d;
}

double SparseSymMatrix::coeff(int i, int j) const {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        if (col_idx[p] == j) return vals[p];
    return 0.0;
}

SparseSymMatrix assemble_stiffness(const Mesh& mesh, const FeFunction& q) {
    check_field(mesh, q, "assemble_stiffness");
    SparseSymMatrix A = make_pattern(mesh);
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom g = tri_geometry(mesh, t);
        const double qbar =
            (q.values[tri[0]] + q.values[tri[1]] + q.values[tri[2]]) / 3.0;
        const double f = qbar / (4.0 * g.area);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                A.vals[pattern_pos(A, tri[a], tri[b])] +=
                    f * (g.b[a] * g.b[b] + g.c[a] * g.c[b]);
    }
    return A;
}

SparseSymMatrix assemble_mass(const Mesh& mesh, const FeFunction& sigma) {
    check_field(mesh, sigma, "assemble_mass");
    SparseSymMatrix M = make_pattern(mesh);
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom g = tri_geometry(mesh, t);
        const double s0 = sigma.values[tri[0]];
        const double s1 = sigma.values[tri[1]];
        const double s2 = sigma.values[tri[2]];
        const double w = g.area / 60.0;
        const double sv[3] = {s0, s1, s2};
        // integral_T sigma_h phi_a phi_b, exact:
        //   a == b: |T|/60 (6 s_a + 2 s_b + 2 s_c)
        //   a != b: |T|/60 (2 s_a + 2 s_b + s_c)
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                double e;
                if (a == b) {
                    int o1 = (a + 1) % 3, o2 = (a + 2) % 3;
                    e = w * (6.0 * sv[a] + 2.0 * sv[o1] + 2.0 * sv[o2]);
                } else {
                    int c = 3 - a - b;
                    e = w * (2.0 * sv[a] + 2.0 * sv[b] + sv[c]);
                }
                M.vals[pattern_pos(M, tri[a], tri[b])] += e;
            }
        }
    }
    return M;
}

std::vector<double> assemble_load(const Mesh& mesh, const FeFunction& f) {
    check_field(mesh, f, "assemble_load");
    std::vector<double> rhs(mesh.node_count(), 0.0);
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom g = tri_geometry(mesh, t);
        const double w = g.area / 12.0;
        const double f0 = f.values[tri[0]];
        const double f1 = f.values[tri[1]];
        const double f2 = f.values[tri[2]];
        // rows of the unit-coefficient local mass (|T|/12) [[2,1,1],...]
        rhs[tri[0]] += w * (2.0 * f0 + f1 + f2);
        rhs[tri[1]] += w * (f0 + 2.0 * f1 + f2);
        rhs[tri[2]] += w * (f0 + f1 + 2.0 * f2);
    }
    return rhs;
}

namespace {

struct Condensed {
    std::vector<int> interior;        // interior node ids
    std::vector<int> pos_of_node;     // node id -> interior position or -1
    std::vector<double> rhs;          // condensed right-hand side
};

Condensed condense(const SparseSymMatrix& A, const std::vector<double>& rhs,
                   const std::vector<double>& bvals, const Mesh& mesh) {
    Condensed c;
    c.pos_of_node.assign(mesh.node_count(), -1);
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (!mesh.is_boundary[i]) {
            c.pos_of_node[i] = static_cast<int>(c.interior.size());
            c.interior.push_back(i);
        }
    }
    c.rhs.resize(c.interior.size());
    for (std::size_t k = 0; k < c.interior.size(); ++k) {
        int i = c.interior[k];
        double r = rhs[i];
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            int j = A.col_idx[p];
            if (mesh.is_boundary[j]) r -= A.vals[p] * bvals[j];
        }
        c.rhs[k] = r;
    }
    return c;
}

// y = A_II x over the interior block only.
void apply_interior(const SparseSymMatrix& A, const Condensed& c,
                    const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t m = c.interior.size();
    y.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        int i = c.interior[k];
        double s = 0.0;
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            int jpos = c.pos_of_node[A.col_idx[p]];
            if (jpos >= 0) s += A.vals[p] * x[jpos];
        }
        y[k] = s;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> solve_dense_interior(const SparseSymMatrix& A,
                                         const Condensed& c) {
    const int m = static_cast<int>(c.interior.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        int i = c.interior[k];
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            int jpos = c.pos_of_node[A.col_idx[p]];
            if (jpos >= 0) K(k, jpos) = A.vals[p];
        }
    }
    Eigen::VectorXd b(m);
    for (int k = 0; k < m; ++k) b(k) = c.rhs[k];
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: dense factorization failed "
                                 "(system not positive definite)");
    Eigen::VectorXd x = llt.solve(b);
    return std::vector<double>(x.data(), x.data() + m);
}

} // namespace

DirichletSolve solve_dirichlet(const SparseSymMatrix& A,
                               const std::vector<double>& rhs,
                               const std::vector<double>& boundary_values,
                               const std::shared_ptr<const Mesh>& mesh,
                               SolverKind kind) {
    if (!mesh) throw std::invalid_argument("solve_dirichlet: null mesh");
    if (A.dim != mesh->node_count() ||
        static_cast<int>(rhs.size()) != A.dim ||
        static_cast<int>(boundary_values.size()) != A.dim)
        throw std::invalid_argument("solve_dirichlet: size mismatch");

    Condensed c = condense(A, rhs, boundary_values, *mesh);
    const std::size_t m = c.interior.size();

    DirichletSolve out;
    out.u = FeFunction(mesh, 0.0);
    for (int id : mesh->boundary_nodes)
        out.u.values[id] = boundary_values[id];
    if (m == 0) return out;

    std::vector<double> x(m, 0.0);
    bool need_dense = (kind == SolverKind::dense);

    if (kind == SolverKind::pcg) {
        std::vector<double> diag(m);
        for (std::size_t k = 0; k < m; ++k) {
            double d = A.coeff(c.interior[k], c.interior[k]);
            if (d <= 0.0)
                throw std::runtime_error("solve_dirichlet: non-positive diagonal");
            diag[k] = d;
        }
        const double bnorm = std::sqrt(dot(c.rhs, c.rhs));
        if (bnorm == 0.0) {
            x.assign(m, 0.0);
        } else {
            const double tol = 1e-10;
            const int cap = 20 * mesh->node_count();
            std::vector<double> r = c.rhs, z(m), p(m), Ap(m);
            for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / diag[k];
            p = z;
            double rz = dot(r, z);
            double rn = std::sqrt(dot(r, r));
            int it = 0;
            while (rn / bnorm > tol && it < cap) {
                apply_interior(A, c, p, Ap);
                double pAp = dot(p, Ap);
                if (pAp <= 0.0)
                    throw std::runtime_error(
                        "solve_dirichlet: CG direction of non-positive "
                        "curvature (system not positive definite)");
                double alpha = rz / pAp;
                for (std::size_t k = 0; k < m; ++k) {
                    x[k] += alpha * p[k];
                    r[k] -= alpha * Ap[k];
                }
                for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / diag[k];
                double rz_new = dot(r, z);
                double beta = rz_new / rz;
                rz = rz_new;
                for (std::size_t k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
                rn = std::sqrt(dot(r, r));
                ++it;
            }
            out.iterations = it;
            out.rel_residual = rn / bnorm;
            out.converged = (rn / bnorm <= tol);
            if (!out.converged) {
                if (mesh->node_count() <= 2000) {
                    need_dense = true;
                    out.dense_fallback = true;
                } else {
                    throw std::runtime_error(
                        "solve_dirichlet: CG hit the iteration cap on a mesh "
                        "too large for the dense fallback");
                }
            }
        }
    }

    if (need_dense) {
        x = solve_dense_interior(A, c);
        out.converged = true;
        out.rel_residual = 0.0;
    }

    for (std::size_t k = 0; k < m; ++k) out.u.values[c.interior[k]] = x[k];
    return out;
}

FeFunction nodal_interpolate(const std::function<double(double, double)>& f,
                             const std::shared_ptr<const Mesh>& mesh) {
    if (!mesh) throw std::invalid_argument("nodal_interpolate: null mesh");
    FeFunction out(mesh, 0.0);
    for (int i = 0; i < mesh->node_count(); ++i) {
        double v = f(mesh->nodes[i][0], mesh->nodes[i][1]);
        if (!std::isfinite(v))
            throw std::domain_error("nodal_interpolate: non-finite sample");
        out.values[i] = v;
    }
    return out;
}

std::vector<std::array<double, 2>> element_gradient(const FeFunction& u) {
    if (!u.mesh) throw std::invalid_argument("element_gradient: null mesh");
    const Mesh& mesh = *u.mesh;
    check_field(mesh, u, "element_gradient");
    std::vector<std::array<double, 2>> g(mesh.tri_count());
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom geo = tri_geometry(mesh, t);
        double gx = 0.0, gy = 0.0;
        for (int a = 0; a < 3; ++a) {
            gx += u.values[tri[a]] * geo.b[a];
            gy += u.values[tri[a]] * geo.c[a];
        }
        g[t] = {gx / (2.0 * geo.area), gy / (2.0 * geo.area)};
    }
    return g;
}

double l2_norm(const FeFunction& u) {
    if (!u.mesh) throw std::invalid_argument("l2_norm: null mesh");
    const Mesh& mesh = *u.mesh;
    check_field(mesh, u, "l2_norm");
    double s = 0.0;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom g = tri_geometry(mesh, t);
        const double u0 = u.values[tri[0]];
        const double u1 = u.values[tri[1]];
        const double u2 = u.values[tri[2]];
        // u^T (local unit mass) u with local mass (|T|/12) [[2,1,1],...]
        s += g.area / 6.0 *
             (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u1 * u2 + u0 * u2);
    }
    return std::sqrt(s);
}

double h1_seminorm(const FeFunction& u) {
    if (!u.mesh) throw std::invalid_argument("h1_seminorm: null mesh");
    const Mesh& mesh = *u.mesh;
    check_field(mesh, u, "h1_seminorm");
    double s = 0.0;
    auto grads = element_gradient(u);
    for (int t = 0; t < mesh.tri_count(); ++t) {
        TriGeom g = tri_geometry(mesh, t);
        s += g.area * (grads[t][0] * grads[t][0] + grads[t][1] * grads[t][1]);
    }
    return std::sqrt(s);
}

FeFunction transfer_fine_to_coarse(const FeFunction& u_fine,
                                   const std::shared_ptr<const Mesh>& coarse) {
    if (!u_fine.mesh || !coarse)
        throw std::invalid_argument("transfer_fine_to_coarse: null mesh");
    const Mesh& fine = *u_fine.mesh;
    if (coarse->n < 1 || fine.n % coarse->n != 0)
        throw std::invalid_argument(
            "transfer_fine_to_coarse: meshes not nested (fine n must be a "
            "multiple of coarse n)");
    const int r = fine.n / coarse->n;
    FeFunction out(coarse, 0.0);
    for (int j = 0; j <= coarse->n; ++j)
        for (int i = 0; i <= coarse->n; ++i)
            out.values[coarse->node_index(i, j)] =
                u_fine.values[fine.node_index(i * r, j * r)];
    return out;
}

double l2_error_midpoint(const FeFunction& u,
                         const std::function<double(double, double)>& ref) {
    if (!u.mesh) throw std::invalid_argument("l2_error_midpoint: null mesh");
    const Mesh& mesh = *u.mesh;
    check_field(mesh, u, "l2_error_midpoint");
    double s = 0.0;
    for (int t = 0; t < mesh.tri_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        TriGeom g = tri_geometry(mesh, t);
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            double mx = 0.5 * (mesh.nodes[a][0] + mesh.nodes[b][0]);
            double my = 0.5 * (mesh.nodes[a][1] + mesh.nodes[b][1]);
            double uh = 0.5 * (u.values[a] + u.values[b]);
            double d = uh - ref(mx, my);
            s += g.area / 3.0 * d * d;
        }
    }
    return std::sqrt(s);
}

} // namespace qpat
