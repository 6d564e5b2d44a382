"""Numerical toolkit for affine opers, their Q-functions and trivial-monodromy loci."""

from .errors import NumericFailure, OperlabError, ValidationError
from .liealg_core import AlgebraData, build_algebra, parse_algebra_id, supported_algebras

__version__ = "0.1.0"

__all__ = [
    "AlgebraData",
    "NumericFailure",
    "OperlabError",
    "ValidationError",
    "build_algebra",
    "parse_algebra_id",
    "supported_algebras",
]
