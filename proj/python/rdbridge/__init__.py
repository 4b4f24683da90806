"""Rate-distortion curves by Blahut-Arimoto, with Schrodinger-potential checks.

All information quantities are in nats. Arrays are numpy float64.
"""
from ._rdbridge import (
    ConvergenceFailure,
    EmptyComparison,
    InvalidInput,
    StaleCertificate,
    ba_fixed_point,
    check_optimality,
    d_floor,
    d_max,
    discretize_gaussian,
    dual_certificate,
    entropy,
    hamming,
    kl_divergence,
    mutual_information,
    oracle_bernoulli_hamming,
    oracle_gaussian_mse,
    rd_curve,
    set_threads,
    sinkhorn,
    solve_for_distortion,
    squared_error,
)

__all__ = [name for name in dir() if not name.startswith("_")]
