"""Exact one-sample update of the standardized covariance matrix.

With ``Z_n`` the standardized prefix and ``Q_n = Z_n.T @ Z_n / (n - 1)``, the
next matrix follows from ``Q_n`` and the new sample alone::

    n Q_{n+1} = D ((n-1) Q_n) D + n d d.T + z z.T

where ``D = diag(scale_n / scale_{n+1})``, ``d = (mean_n - mean_{n+1}) / scale_{n+1}``
and ``z = (x_{n+1} - mean_{n+1}) / scale_{n+1}``.  The cross terms vanish
because the columns of ``Z_n`` have zero mean.  Turning centering off zeroes
``d`` (and the subtracted mean); turning scaling off sets every scale to 1.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError, InsufficientDataError, StepMismatchError
from .moments import MomentAccumulator, as_sample, standardize, statistics


@dataclass(frozen=True)
class CovarianceState:
    q: np.ndarray
    n: int
    mean: np.ndarray
    std: np.ndarray

    @property
    def m(self):
        return self.q.shape[0]


def covariance_from_block(x, stats):
    """``Z.T @ Z / (n - 1)`` for a retained block standardized by ``stats``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, have {n}")
    z = standardize(x, stats)
    q = z.T @ z / (n - 1)
    q = 0.5 * (q + q.T)
    return CovarianceState(q, n, stats.center.copy(), stats.scale.copy())


def init_covariance(x_start, config):
    """Warm-up covariance of the first ``n_start`` rows."""
    x_start = np.atleast_2d(np.asarray(x_start, dtype=float))
    if x_start.shape[0] < 2:
        raise InsufficientDataError(f"n_start must be >= 2, got {x_start.shape[0]}")
    if x_start.shape[1] != config.m:
        raise DimensionError(f"expected {config.m} columns, got {x_start.shape[1]}")
    acc = MomentAccumulator.from_rows(x_start)
    stats = statistics(acc, config.centering, config.scaling, config.zero_variance)
    return covariance_from_block(x_start, stats)


@njit(cache=True)
def _recursion(q, ratio, z, d, n):
    m = q.shape[0]
    out = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            v = ((n - 1) * (ratio[i] * q[i, j] * ratio[j]) + z[i] * z[j] + n * (d[i] * d[j])) / n
            out[i, j] = v
            out[j, i] = v
    return out


def update_covariance(state, old, new, x_new, n):
    """Fold ``x_new`` into ``state`` (which must reflect exactly ``n`` samples).

    ``old`` and ``new`` are the :class:`~incpca.moments.Standardization` of the
    prefix before and after ``x_new``.  Only m x m work is done.
    """
    if state.n != n:
        raise StepMismatchError(f"covariance reflects {state.n} samples, caller says {n}")
    if n < 2:
        raise InsufficientDataError("covariance recursion needs n >= 2")
    x_new = as_sample(x_new, state.m)
    new_scale = new.scale
    if np.any(new_scale == 0.0):
        standardize(x_new, new)  # raises DegenerateVariableError with columns
    ratio = old.scale / new_scale
    z = (x_new - new.center) / new_scale
    d = (old.center - new.center) / new_scale
    # filled one triangle at a time, so the result is exactly symmetric
    q = _recursion(state.q, ratio, z, d, n)
    return CovarianceState(q, n + 1, new.center.copy(), new_scale.copy())


def frobenius_distance(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))
