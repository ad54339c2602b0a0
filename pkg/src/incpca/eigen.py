"""Symmetric eigendecomposition by cyclic Jacobi rotations.

Convention used throughout the package: the loadings matrix ``C`` stores one
eigenvector per *row*, row ``i`` paired with ``eigenvalues[i]``, eigenvalues
in descending order.  Principal-component values of a standardized sample
``z`` are ``p = z @ C.T`` and the inverse is ``z = p @ C``.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, DimensionError, NotSymmetricError

OFF_DIAGONAL_TOL = 1e-13
MAX_SWEEPS = 64
SYMMETRY_TOL = 1e-10
# Entries within this relative distance of a row's largest magnitude count as
# tied for the sign pivot.  Exact ties are structural (every 2x2 correlation
# matrix has eigenvectors (1, +-1)/sqrt(2)), and without a tolerance rounding
# noise would pick the pivot.
CANONICAL_TIE_REL = 1e-9


@dataclass(frozen=True)
class EigenState:
    eigenvalues: np.ndarray
    loadings: np.ndarray

    @property
    def m(self):
        return self.eigenvalues.shape[0]


@njit(cache=True)
def _off_norm(a):
    m = a.shape[0]
    s = 0.0
    for p in range(m - 1):
        for q in range(p + 1, m):
            s += a[p, q] * a[p, q]
    return np.sqrt(2.0 * s)


@njit(cache=True)
def _jacobi(a, v, tol, max_sweeps):
    # a is overwritten with the (nearly) diagonal matrix, v accumulates the
    # rotations so that v.T @ a_in @ v = a_out. Returns the sweep count, or -1.
    m = a.shape[0]
    frob = np.sqrt(np.sum(a * a))
    target = tol * frob
    for sweep in range(max_sweeps + 1):
        if _off_norm(a) <= target:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(m):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(m):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(m):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


@njit(cache=True)
def _pivot(v, k, tie):
    m = v.shape[0]
    big = 0.0
    for j in range(m):
        big = max(big, abs(v[j, k]))
    for j in range(m):
        if abs(v[j, k]) >= big * (1.0 - tie):
            return j
    return 0


@njit(cache=True)
def _eigh_kernel(q, tol, max_sweeps):
    m = q.shape[0]
    a = q.copy()
    v = np.eye(m)
    sweeps = _jacobi(a, v, tol, max_sweeps)
    diag = np.empty(m)
    for i in range(m):
        diag[i] = a[i, i]
    order = np.argsort(-diag, kind="mergesort")
    vals = np.empty(m)
    rows = np.empty((m, m))
    for i in range(m):
        k = order[i]
        vals[i] = diag[k]
        # canonical sign: largest |entry| positive, first index on ties
        best = _pivot(v, k, CANONICAL_TIE_REL)
        sign = -1.0 if v[best, k] < 0.0 else 1.0
        for j in range(m):
            rows[i, j] = sign * v[j, k]
    return vals, rows, sweeps


def eigh_trusted(q):
    """:func:`eigh_descending` without input validation, for matrices that are
    symmetric by construction (the engine's covariance).  Always canonical."""
    vals, rows, sweeps = _eigh_kernel(q, OFF_DIAGONAL_TOL, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    return EigenState(vals, rows)


def canonicalize(loadings):
    """Flip rows so each row's largest-magnitude entry is positive.

    Magnitudes within ``CANONICAL_TIE_REL`` of the row maximum are ties, won
    by the lowest index.  Returns a new array.
    """
    c = np.array(loadings, dtype=float, copy=True)
    if c.size == 0:
        return c
    mag = np.abs(c)
    near = mag >= mag.max(axis=1, keepdims=True) * (1.0 - CANONICAL_TIE_REL)
    pivots = np.argmax(near, axis=1)
    signs = np.where(c[np.arange(c.shape[0]), pivots] < 0.0, -1.0, 1.0)
    return c * signs[:, None]


def eigh_descending(q, *, tol=OFF_DIAGONAL_TOL, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    q : (m, m) array_like
        Symmetric matrix.  Asymmetry above ``SYMMETRY_TOL * ||q||_F`` raises
        :class:`NotSymmetricError`; smaller asymmetry is averaged away.
    tol : float
        Stop once the off-diagonal Frobenius norm is ``<= tol * ||q||_F``.
    max_sweeps : int
        Cap on full cyclic sweeps before :class:`ConvergenceError`.

    Returns
    -------
    EigenState
        Rows of ``loadings`` are orthonormal eigenvectors, sign-canonicalized
        as in :func:`canonicalize`.  Equal eigenvalues keep their diagonal
        order (stable sort).
    """
    a = np.array(q, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DimensionError("empty matrix")
    if not np.all(np.isfinite(a)):
        raise NotSymmetricError("matrix has non-finite entries")
    norm = np.linalg.norm(a)
    asym = np.linalg.norm(a - a.T)
    if asym > SYMMETRY_TOL * max(norm, np.finfo(float).tiny):
        raise NotSymmetricError(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:g} * ||Q||_F")
    a = 0.5 * (a + a.T)
    vals, rows, sweeps = _eigh_kernel(a, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return EigenState(vals, rows)


def _check_width(vec, loadings):
    if vec.shape[-1] != loadings.shape[1] or loadings.shape[0] != loadings.shape[1]:
        raise DimensionError(
            f"vector width {vec.shape[-1]} incompatible with loadings {loadings.shape}"
        )


def project(z, loadings):
    """PC values ``z @ C.T``; works on a single sample or a stack of rows."""
    z = np.asarray(z, dtype=float)
    loadings = np.asarray(loadings, dtype=float)
    _check_width(z, loadings)
    return z @ loadings.T


def reconstruct(p, loadings, standardization=None):
    """Inverse of :func:`project`, optionally un-standardizing the result.

    ``C`` is orthogonal so the inverse is ``p @ C``.  With a
    :class:`~incpca.moments.Standardization` the result is mapped back to
    raw units; without one it stays in standardized space.
    """
    p = np.asarray(p, dtype=float)
    loadings = np.asarray(loadings, dtype=float)
    _check_width(p, loadings)
    z = p @ loadings
    if standardization is None:
        return z
    return standardization.unstandardize(z)
