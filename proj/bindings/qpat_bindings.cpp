#include "qpat/harness.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace qpat;

PYBIND11_MODULE(_qpat, m) {
    m.doc() = "Finite-element pipeline for quantitative photoacoustic "
              "reconstruction on the unit square";

    py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
        .def_readonly("n", &Mesh::n)
        .def_readonly("h", &Mesh::h)
        .def("node_count", &Mesh::node_count)
        .def("tri_count", &Mesh::tri_count)
        .def("node_index", &Mesh::node_index)
        .def_readonly("boundary_nodes", &Mesh::boundary_nodes)
        .def_readonly("nodes", &Mesh::nodes)
        .def_readonly("triangles", &Mesh::triangles);

    m.def("build_mesh", [](int n) {
        return std::make_shared<Mesh>(build_unit_square_mesh(n));
    });

    py::class_<FeFunction>(m, "FeFunction")
        .def_readonly("values", &FeFunction::values)
        .def("mesh_n", [](const FeFunction& f) { return f.mesh->n; });

    m.def("interpolate",
          [](const std::function<double(double, double)>& f,
             const std::shared_ptr<Mesh>& mesh) {
              return nodal_interpolate(f, mesh);
          });
    m.def("l2_norm", &l2_norm);
    m.def("h1_seminorm", &h1_seminorm);

    m.def("illumination_coefficients",
          [](int L, int M, std::uint64_t seed, double theta_power) {
              return sample_illuminations(L, M, seed, theta_power)
                  .coefficients;
          },
          py::arg("L"), py::arg("M"), py::arg("seed"),
          py::arg("theta_power") = 3.0);

    m.def("example_names", [] {
        std::vector<std::string> names;
        for (int id = 1; id <= 5; ++id)
            names.push_back(example_spec(id).name);
        return names;
    });

    m.def("run_example",
          [](int example_id, int n_fine, int n, int L, int M, double delta,
             double alpha, std::uint64_t seed, int max_iters) {
              RunParams p;
              p.n_fine = n_fine;
              p.n = n;
              p.L = L;
              p.M = M;
              p.delta = delta;
              p.alpha = alpha;
              p.seed = seed;
              p.max_iters = max_iters;
              RunResult r = run_example(example_spec(example_id), p);
              py::dict out;
              out["e_D"] = r.inversion.e_D;
              out["e_sigma"] = r.inversion.e_sigma;
              out["iterations"] = r.inversion.stage1.iterations;
              out["J_final"] = r.inversion.stage1.objective_history.back();
              out["q_star"] = r.inversion.q_star.values;
              return out;
          },
          py::arg("example_id"), py::arg("n_fine") = 16, py::arg("n") = 8,
          py::arg("L") = 2, py::arg("M") = 3, py::arg("delta") = 1e-2,
          py::arg("alpha") = 1e-6, py::arg("seed") = 1,
          py::arg("max_iters") = 20);
}
