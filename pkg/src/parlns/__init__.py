"""Parallel portfolio of bandit-guided LNS workers for mixed-integer programs."""

from .model import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    MAXIMIZE,
    MINIMIZE,
    LinearConstraint,
    MipModel,
    NeighborhoodSpec,
    Solution,
    Variable,
    apply_neighborhood,
    evaluate,
    make_model,
)
from .mps import parse_mps, write_mps
from .metrics import GapTrace, aggregate_min, primal_gap, primal_integral

__version__ = "0.1.0"

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "INTEGER",
    "MAXIMIZE",
    "MINIMIZE",
    "GapTrace",
    "LinearConstraint",
    "MipModel",
    "NeighborhoodSpec",
    "Solution",
    "Variable",
    "aggregate_min",
    "apply_neighborhood",
    "evaluate",
    "make_model",
    "parse_mps",
    "primal_gap",
    "primal_integral",
    "write_mps",
    "__version__",
]
