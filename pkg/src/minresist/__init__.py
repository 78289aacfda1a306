"""Numerical minimization of Newton's resistance over convex bodies.

The body is the convex hull of finitely many points above the unit disc;
its upper boundary decomposes exactly into planar triangles and conical
pieces, giving machine-precision objective values and gradients that the
free and restricted (two-arc) solvers consume.
"""

from .errors import (DegenerateConfiguration, EmptyArc, InvalidLift, NoRoot)
from .geometry import (BoundaryTriangle, Combinatorics, ConePiece,
                       PointTriangle, ProblemConfig, UpperBoundary,
                       build_upper_boundary, validate_decomposition)
from .resistance import (ResistanceEval, evaluate, evaluate_with_gradient,
                         hessian)
from .symmetry import (FrozenObjective, evaluate_symmetric, orbit,
                       orbit_transforms, project_to_sector)
from .freeopt import (OptimizerOptions, init_points, refine_free,
                      run_free_problem, solve_free, solve_free_nonsymmetric)
from .restricted import (RestrictedVars, assemble_points,
                         evaluate_restricted, init_restricted_from_free,
                         refine_X, refine_Y, run_restricted_problem,
                         solve_restricted)
from .mesh import Mesh, body_mesh, mesh_resistance, write_obj, write_ply
from .manifest import RunManifest

__all__ = [
    "BoundaryTriangle", "Combinatorics", "ConePiece", "DegenerateConfiguration",
    "EmptyArc", "FrozenObjective", "InvalidLift", "Mesh", "NoRoot",
    "OptimizerOptions", "PointTriangle", "ProblemConfig", "ResistanceEval",
    "RestrictedVars", "RunManifest", "UpperBoundary", "assemble_points",
    "body_mesh", "build_upper_boundary", "evaluate", "evaluate_restricted",
    "evaluate_symmetric", "evaluate_with_gradient", "hessian", "init_points",
    "init_restricted_from_free", "mesh_resistance", "orbit",
    "orbit_transforms", "project_to_sector", "refine_X", "refine_Y",
    "refine_free", "run_free_problem", "run_restricted_problem",
    "solve_free", "solve_free_nonsymmetric", "solve_restricted",
    "validate_decomposition", "write_obj", "write_ply",
]

__version__ = "1.0.0"
