"""Exact Richelot isogeny trees for genus-2 Jacobians over Q.

Exact arithmetic in iterated quadratic extensions, quadratic splittings
and the Richelot operator with explicit point transport, the divisor
model of 2-torsion with its Weil pairing, maximal isotropic subgroup
graphs over Z/2^n, and the decorated 15-regular tree with its field
tower, all over a validated rational specialization of the five branch
points.
"""

from .poly import Poly, PolynomialError, ProjPoint, quad_roots
from .splitting import (
    Curve,
    DegeneratePointError,
    MembershipError,
    PairTriple,
    QuadraticSplitting,
    SplitJacobianError,
    SplittingClass,
    dual_matrix,
    enumerate_classes,
    map_N,
    matrix_M,
    pushforward_point,
    richelot_class,
    richelot_curve,
    richelot_splitting,
    splitting_for_class,
)
from .tower import (
    ContextMismatchError,
    TowerContext,
    TowerElement,
    TowerError,
    adjoin_sqrt,
    parse_element,
)
from .tree import (
    DEFAULT_ALPHAS,
    DecoratedTree,
    FieldTower,
    build_tree,
    field_generators,
    find_default_specialization,
    mumford_bridge,
    tree_to_json,
    validate_decoration,
    validate_specialization,
    verify_k2prime,
)
from .verify import RunConfig, run_suites

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "ContextMismatchError",
    "DEFAULT_ALPHAS",
    "DecoratedTree",
    "DegeneratePointError",
    "FieldTower",
    "MembershipError",
    "PairTriple",
    "Poly",
    "PolynomialError",
    "ProjPoint",
    "QuadraticSplitting",
    "RunConfig",
    "SplitJacobianError",
    "SplittingClass",
    "TowerContext",
    "TowerElement",
    "TowerError",
    "adjoin_sqrt",
    "build_tree",
    "dual_matrix",
    "enumerate_classes",
    "field_generators",
    "find_default_specialization",
    "map_N",
    "matrix_M",
    "mumford_bridge",
    "parse_element",
    "pushforward_point",
    "quad_roots",
    "richelot_class",
    "richelot_curve",
    "richelot_splitting",
    "run_suites",
    "splitting_for_class",
    "tree_to_json",
    "validate_decoration",
    "validate_specialization",
    "verify_k2prime",
]
