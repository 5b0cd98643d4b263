#pragma once

// Structured triangulations of the unit square. Each of the n*n grid cells is
// split along the diagonal from its lower-left to its upper-right corner:
//
//   v01 --- v11        lower triangle {v00, v10, v11}
//    | \     |         upper triangle {v00, v11, v01}
//    |   \   |         both counter-clockwise, area h^2/2
//   v00 --- v10
//
// Nodes are stored row-major: node(i,j) = j*(n+1) + i at (i*h, j*h). Boundary
// nodes carry an arc-length coordinate s in [0,4), measured counter-clockwise
// from (0,0) along the perimeter.

#include <array>
#include <functional>
#include <vector>

namespace qpat {

struct Mesh {
    int n = 0;
    double h = 0.0;
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary_nodes;          // ascending node indices
    std::vector<char> is_boundary;            // per node
    std::vector<double> boundary_arclength;   // per node; -1 for interior nodes
    std::vector<char> subdomain_tags;         // per triangle; 1 inside Omega'

    int node_count() const { return static_cast<int>(nodes.size()); }
    int tri_count() const { return static_cast<int>(triangles.size()); }
    int node_index(int i, int j) const { return j * (n + 1) + i; }
    double tri_area() const { return 0.5 * h * h; }

    std::array<double, 2> barycenter(int t) const {
        const auto& tri = triangles[t];
        double bx = 0.0, by = 0.0;
        for (int v : tri) {
            bx += nodes[v][0];
            by += nodes[v][1];
        }
        return {bx / 3.0, by / 3.0};
    }
};

// Uniform right-triangle mesh with n subdivisions per side. Throws on n < 1.
Mesh build_unit_square_mesh(int n);

// Returns a copy of the mesh with subdomain_tags[t] = 1 exactly where the
// barycenter of triangle t satisfies the predicate.
Mesh tag_subdomain(const Mesh& mesh,
                   const std::function<bool(double, double)>& inside);

// Tags the default reconstruction subdomain: all elements whose barycenter
// lies in (h, 1-h)^2, i.e. every element not touching the outer boundary.
Mesh tag_interior_subdomain(const Mesh& mesh);

// Boundary arc-length map as (node index, s) pairs in ascending node order.
std::vector<std::pair<int, double>> boundary_arclength(const Mesh& mesh);

// Signed area of triangle t (positive for counter-clockwise orientation).
double signed_area(const Mesh& mesh, int t);

} // namespace qpat
