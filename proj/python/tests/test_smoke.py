import math

import qpatfem


def test_mesh_counts():
    mesh = qpatfem.build_mesh(8)
    assert mesh.n == 8
    assert mesh.node_count() == 81
    assert mesh.tri_count() == 128
    assert len(mesh.boundary_nodes) == 32


def test_norms_of_interpolants():
    mesh = qpatfem.build_mesh(64)
    fx = qpatfem.interpolate(lambda x, y: x, mesh)
    assert math.isclose(qpatfem.l2_norm(fx), 1.0 / math.sqrt(3.0), rel_tol=1e-12)
    assert math.isclose(qpatfem.h1_seminorm(fx), 1.0, rel_tol=1e-12)


def test_illuminations_are_deterministic():
    a = qpatfem.illumination_coefficients(3, 4, seed=7)
    b = qpatfem.illumination_coefficients(3, 4, seed=7)
    c = qpatfem.illumination_coefficients(3, 4, seed=8)
    assert a == b
    assert a != c
    assert len(a) == 3 and all(len(row) == 4 for row in a)


def test_example_catalog():
    names = qpatfem.example_names()
    assert len(names) == 5
    assert len(set(names)) == 5


def test_tiny_reconstruction_runs():
    out = qpatfem.run_example(2, n_fine=16, n=8, L=2, M=3, delta=1e-2,
                              alpha=1e-6, seed=3, max_iters=10)
    assert math.isfinite(out["e_D"]) and out["e_D"] > 0.0
    assert math.isfinite(out["e_sigma"]) and out["e_sigma"] > 0.0
    assert out["iterations"] <= 10
    assert math.isfinite(out["J_final"])
    assert len(out["q_star"]) == 81
