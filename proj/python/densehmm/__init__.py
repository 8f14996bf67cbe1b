"""HMMs with dense softmax-factorized parameters.

Thin wrapper over the C++ core. Models are plain numpy triples (A, B, pi);
dense representations are dicts {U, Z, W, V, z_start}.
"""

from ._densehmm import (
    DataError,
    NumericError,
    analytic_cooc,
    baum_welch_fit,
    build_synthetic_hmm,
    cooc_mad,
    dense_em_fit,
    direct_fit,
    dof_report,
    empirical_cooc,
    forward_backward,
    init_reps,
    materialize,
    row_softmax,
    sample,
    score_nll,
    sequence_log_likelihood,
    stationary_distribution,
)

__all__ = [
    "DataError",
    "NumericError",
    "analytic_cooc",
    "baum_welch_fit",
    "build_synthetic_hmm",
    "cooc_mad",
    "dense_em_fit",
    "direct_fit",
    "dof_report",
    "empirical_cooc",
    "forward_backward",
    "init_reps",
    "materialize",
    "row_softmax",
    "sample",
    "score_nll",
    "sequence_log_likelihood",
    "stationary_distribution",
]
