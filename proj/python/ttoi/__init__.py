"""Tensor-train SVD and orthogonal iteration.

Arrays use Fortran (first index fastest) layout internally; any numpy array
is accepted and converted.
"""

from ._core import (
    FormatError,
    NumericError,
    StateError,
    bic_score,
    contract,
    empirical_transition,
    estimate_transition,
    generate_aggregatable,
    generate_spiked,
    read_tensor,
    sample_trajectory,
    select_ranks,
    simplex_project,
    tt_ranks,
    tt_svd,
    ttoi,
    write_tensor,
)

__all__ = [
    "FormatError",
    "NumericError",
    "StateError",
    "bic_score",
    "contract",
    "empirical_transition",
    "estimate_transition",
    "generate_aggregatable",
    "generate_spiked",
    "read_tensor",
    "sample_trajectory",
    "select_ranks",
    "simplex_project",
    "tt_ranks",
    "tt_svd",
    "ttoi",
    "write_tensor",
]
