"""Reference batch PCA on a fully retained data matrix.

This is the ground truth for every equivalence check.  It computes means and
standard deviations with numpy's two-pass reductions and builds the covariance
from the full standardized matrix, sharing nothing with the incremental path
except :func:`~incpca.eigen.eigh_descending` (and its sign canonicalization).
It keeps all of ``X`` in memory on purpose; that cost is exactly what the
incremental engine avoids.
"""

import time
from dataclasses import dataclass

import numpy as np

from .eigen import eigh_descending
from .errors import DegenerateVariableError, DimensionError, InsufficientDataError


@dataclass(frozen=True)
class BatchResult:
    mean: np.ndarray
    stddev: np.ndarray
    q: np.ndarray
    eigenvalues: np.ndarray
    loadings: np.ndarray
    pcs: np.ndarray


def batch_pca(x, config):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, m = x.shape
    if m != config.m:
        raise DimensionError(f"expected {config.m} columns, got {m}")
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, have {n}")
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    # Same zero-variance rule as the running sums: spread below the round-off
    # floor of sum(x**2) counts as a constant column.
    floor = 16 * np.finfo(float).eps * np.einsum("ij,ij->j", x, x)
    std = np.where(std * std * (n - 1) <= floor, 0.0, std)
    center = mean if config.centering else np.zeros(m)
    if config.scaling:
        zero = std == 0.0
        if zero.any():
            if config.zero_variance == "error":
                cols = np.flatnonzero(zero).tolist()
                raise DegenerateVariableError(f"zero variance in variable(s) {cols}", cols)
            scale = np.where(zero, 1.0, std)
        else:
            scale = std
    else:
        scale = np.ones(m)
    z = (x - center) / scale
    q = z.T @ z / (n - 1)
    q = 0.5 * (q + q.T)
    eig = eigh_descending(q)
    return BatchResult(mean, std, q, eig.eigenvalues, eig.loadings, z @ eig.loadings.T)


def batch_timing_arm(x, prefix_lengths, config, clock=time.perf_counter):
    """Wall time of :func:`batch_pca` on each prefix, plus the running total.

    Returns ``(single, cumulative)`` arrays aligned with ``prefix_lengths``.
    """
    x = np.asarray(x, dtype=float)
    single = np.empty(len(prefix_lengths))
    for k, n in enumerate(prefix_lengths):
        t0 = clock()
        batch_pca(x[:n], config)
        single[k] = clock() - t0
    return single, np.cumsum(single)
