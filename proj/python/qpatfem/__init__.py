"""Python face of the reconstruction pipeline.

Thin re-exports of the compiled module; everything heavy lives in C++.
"""

from ._qpat import (
    FeFunction,
    Mesh,
    build_mesh,
    example_names,
    h1_seminorm,
    illumination_coefficients,
    interpolate,
    l2_norm,
    run_example,
)

__all__ = [
    "FeFunction",
    "Mesh",
    "build_mesh",
    "example_names",
    "h1_seminorm",
    "illumination_coefficients",
    "interpolate",
    "l2_norm",
    "run_example",
]
