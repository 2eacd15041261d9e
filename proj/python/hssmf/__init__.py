"""Sparse multifrontal solver with HSS-compressed frontal matrices."""

from ._core import (
    IoError,
    SolverError,
    generate_problem,
    read_matrix,
    write_matrix,
)

__all__ = [
    "IoError",
    "SolverError",
    "generate_problem",
    "read_matrix",
    "write_matrix",
]
