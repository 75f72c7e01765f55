"""Polynomial local-unitary invariants of multipartite pure states encoded as psi-graphs.

The package builds and validates psi-graphs, finds their reflecting cuts,
verifies convexity certificates, contracts invariants on states, turns them
into entanglement monotones and bounds LOCC transition probabilities.
"""

from .graph import (
    BRA,
    KET,
    GraphError,
    PsiGraph,
    build_coxeter_cayley,
    build_cycle,
    build_hypercube,
    cartesian_product,
    validate,
)
from .reflect import (
    enumerate_reflecting_cuts,
    is_edge_reflecting,
    is_fully_edge_reflecting,
    is_vertex_reflecting,
)
from .tensor import (
    DensityMatrix,
    PureState,
    evaluate_invariant,
    evaluate_on_density,
    partial_trace,
    purify,
)

__all__ = [
    "BRA",
    "KET",
    "DensityMatrix",
    "GraphError",
    "PsiGraph",
    "PureState",
    "build_coxeter_cayley",
    "build_cycle",
    "build_hypercube",
    "cartesian_product",
    "enumerate_reflecting_cuts",
    "evaluate_invariant",
    "evaluate_on_density",
    "is_edge_reflecting",
    "is_fully_edge_reflecting",
    "is_vertex_reflecting",
    "partial_trace",
    "purify",
    "validate",
]
