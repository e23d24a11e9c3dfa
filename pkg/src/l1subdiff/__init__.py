"""L1 time stepping on graded meshes for Riemann-Liouville subdiffusion.

The package couples a second-order L1 discretisation of the fractional
memory term with P1 Galerkin finite elements on an interval and ships the
machinery needed to measure convergence against a Mittag-Leffler series
solution.
"""

from .mesh import GradedMesh, InvalidParameterError, PropertyReport, build_graded_mesh, check_mesh_properties
from .frackernel import WeightTable, kernel, primary_weight, secondary_weight, weight_oracle
from .fem1d import (
    Problem,
    SpatialSystem,
    benchmark_problem,
    build_system,
    l2_error,
    l2_project,
    load_vector,
    ritz_project,
    tridiagonal_solve,
)
from .mittag_leffler import SeriesSolution, exact_solution, ml_neg
from .solver import DivergenceError, SolutionHistory, run, step_gcn, step_l1

__all__ = [
    "GradedMesh",
    "InvalidParameterError",
    "PropertyReport",
    "build_graded_mesh",
    "check_mesh_properties",
    "WeightTable",
    "kernel",
    "primary_weight",
    "secondary_weight",
    "weight_oracle",
    "Problem",
    "SpatialSystem",
    "benchmark_problem",
    "build_system",
    "l2_error",
    "l2_project",
    "load_vector",
    "ritz_project",
    "tridiagonal_solve",
    "SeriesSolution",
    "exact_solution",
    "ml_neg",
    "DivergenceError",
    "SolutionHistory",
    "run",
    "step_gcn",
    "step_l1",
]
