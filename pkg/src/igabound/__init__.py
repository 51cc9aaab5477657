"""B-spline Galerkin (isogeometric) solver for bound states of 1D two- and three-body problems."""

__version__ = "0.1.0"

from .assembly import AssembledSystem, SymmetricSparse, assemble, rayleigh
from .eigensolve import EigenSolution, classify_bound, solve_smallest
from .model import Kind, PotentialShape, ProblemSpec, kappa_of, shift_of, unshift
from .quadrature import QuadratureRule, gauss_rule, map_rule
from .space import TensorSpace, build_space, elements, interior_dofs
from .splines import KnotVector, eval_nonzero, graded_knots, open_uniform_knots

__all__ = [
    "AssembledSystem", "SymmetricSparse", "assemble", "rayleigh",
    "EigenSolution", "classify_bound", "solve_smallest",
    "Kind", "PotentialShape", "ProblemSpec", "kappa_of", "shift_of", "unshift",
    "QuadratureRule", "gauss_rule", "map_rule",
    "TensorSpace", "build_space", "elements", "interior_dofs",
    "KnotVector", "eval_nonzero", "graded_knots", "open_uniform_knots",
]
