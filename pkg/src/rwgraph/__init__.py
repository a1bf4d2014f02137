"""Optimal structures in complete graphs with i.i.d. symmetric edge weights.

Rate-function machinery, exact max-weight solvers, pruning certificates and
a seeded Monte Carlo harness for checking ``W_n ~ n Lambda*^{-1}(log n)``.
"""
from .dist import Distribution, Kind, StepTailSpec, make_distribution, parse_dist
from .errors import (DegenerateProbability, DomainError, InstanceTooLarge, InvalidParameter,
                     PatternTooLarge)
from .ratefn import RateFunction, threshold_xn
from .structures import GraphPattern, StructureFamily, parse_pattern

__version__ = "0.1.0"

__all__ = [
    "Distribution",
    "Kind",
    "StepTailSpec",
    "make_distribution",
    "parse_dist",
    "RateFunction",
    "threshold_xn",
    "GraphPattern",
    "StructureFamily",
    "parse_pattern",
    "DomainError",
    "InvalidParameter",
    "DegenerateProbability",
    "PatternTooLarge",
    "InstanceTooLarge",
]
