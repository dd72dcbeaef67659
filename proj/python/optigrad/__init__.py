"""Differentiable convex optimization: solve QPs and conic programs and
differentiate the solution map in forward and reverse mode."""

from ._core import (
    AffineFunction,
    ConeSet,
    Constraint,
    DiffEngine,
    ProblemClass,
    ProblemModel,
    QuadraticFunction,
    SolverSettings,
    SolveStatus,
    VectorAffineFunction,
    build_problem,
    project,
    project_jacobian,
)

__all__ = [
    "AffineFunction",
    "ConeSet",
    "Constraint",
    "DiffEngine",
    "ProblemClass",
    "ProblemModel",
    "QuadraticFunction",
    "SolverSettings",
    "SolveStatus",
    "VectorAffineFunction",
    "build_problem",
    "project",
    "project_jacobian",
]
