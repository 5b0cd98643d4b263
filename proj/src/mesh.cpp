#include "qpat/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace qpat {

Mesh build_unit_square_mesh(int n) {
    if (n < 1)
        throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");

    Mesh m;
    m.n = n;
    m.h = 1.0 / n;

    const int nn = n + 1;
    m.nodes.resize(static_cast<std::size_t>(nn) * nn);
    for (int j = 0; j < nn; ++j)
        for (int i = 0; i < nn; ++i)
            m.nodes[m.node_index(i, j)] = {i * m.h, j * m.h};

    m.triangles.reserve(static_cast<std::size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int v00 = m.node_index(i, j);
            int v10 = m.node_index(i + 1, j);
            int v01 = m.node_index(i, j + 1);
            int v11 = m.node_index(i + 1, j + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }

    m.is_boundary.assign(m.nodes.size(), 0);
    m.boundary_arclength.assign(m.nodes.size(), -1.0);
    for (int j = 0; j < nn; ++j) {
        for (int i = 0; i < nn; ++i) {
            if (i == 0 || i == n || j == 0 || j == n) {
                int id = m.node_index(i, j);
                m.is_boundary[id] = 1;
                m.boundary_nodes.push_back(id);
                double x = m.nodes[id][0], y = m.nodes[id][1];
                double s;
                if (j == 0)       s = x;            // bottom, left to right
                else if (i == n)  s = 1.0 + y;      // right, upward
                else if (j == n)  s = 3.0 - x;      // top, right to left
                else              s = 4.0 - y;      // left, downward; y>0 here
                m.boundary_arclength[id] = s;
            }
        }
    }

    m.subdomain_tags.assign(m.triangles.size(), 0);
    return m;
}

Mesh tag_subdomain(const Mesh& mesh,
                   const std::function<bool(double, double)>& inside) {
    Mesh out = mesh;
    for (int t = 0; t < out.tri_count(); ++t) {
        auto b = out.barycenter(t);
        out.subdomain_tags[t] = inside(b[0], b[1]) ? 1 : 0;
    }
    return out;
}

Mesh tag_interior_subdomain(const Mesh& mesh) {
    const double h = mesh.h;
    return tag_subdomain(mesh, [h](double x, double y) {
        return x > h && x < 1.0 - h && y > h && y < 1.0 - h;
    });
}

std::vector<std::pair<int, double>> boundary_arclength(const Mesh& mesh) {
    std::vector<std::pair<int, double>> out;
    out.reserve(mesh.boundary_nodes.size());
    for (int id : mesh.boundary_nodes)
        out.emplace_back(id, mesh.boundary_arclength[id]);
    return out;
}

double signed_area(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.nodes[tri[0]];
    const auto& p1 = mesh.nodes[tri[1]];
    const auto& p2 = mesh.nodes[tri[2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                  (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

} // namespace qpat
