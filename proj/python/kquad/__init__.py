"""Kernel quadrature by Nystrom subsampling.

Point sets are numpy arrays of shape (n, d); 1-d inputs are read as n points
in dimension 1.
"""

import numpy as np

from . import _kquad
from ._kquad import (
    InputError,
    Kernel,
    NumericalError,
    effective_dimension,
    exact_rls,
    lambda_rule,
    make_kernel,
    mmd,
    periodic_sobolev_1d,
    rate_slope,
    run_experiment,
)

__all__ = [
    "InputError",
    "Kernel",
    "NumericalError",
    "approx_rls",
    "compress",
    "effective_dimension",
    "exact_rls",
    "gram",
    "greedy_select",
    "lambda_rule",
    "make_kernel",
    "median_heuristic",
    "mmd",
    "optimal_weights",
    "periodic_sobolev_1d",
    "rate_slope",
    "run_experiment",
    "worst_case_error",
]


def _points(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("points must be a 1-d or 2-d array")
    return np.ascontiguousarray(arr)


def gram(kernel, x):
    return _kquad.gram(kernel, _points(x))


def median_heuristic(x, subset=1000, seed=0):
    return _kquad.median_heuristic(_points(x), subset, seed)


def compress(x, kernel, method="uniform", m=16, seed=0):
    """Returns (nodes, weights, source_indices)."""
    if isinstance(kernel, str):
        kernel = make_kernel(kernel, _points(x), seed)
    nodes, weights, idx = _kquad.compress(_points(x), kernel, method, m, seed)
    return nodes, weights, np.asarray(idx, dtype=np.int64)


def optimal_weights(kernel, nodes, x, masses=None, uniform_cube=False):
    return _kquad.optimal_weights(kernel, _points(nodes), _points(x), masses, uniform_cube)


def worst_case_error(kernel, nodes, weights, x, masses=None, uniform_cube=False):
    return _kquad.worst_case_error(kernel, _points(nodes), np.asarray(weights, dtype=np.float64), _points(x),
                                   masses, uniform_cube)


def approx_rls(x, kernel, lam, pilot, seed=0):
    return _kquad.approx_rls(_points(x), kernel, lam, pilot, seed)


def greedy_select(x, kernel, m, variant="p-greedy", f=None):
    return np.asarray(_kquad.greedy_select(_points(x), kernel, m, variant, f), dtype=np.int64)
