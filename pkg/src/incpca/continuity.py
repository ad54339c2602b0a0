"""Continuity tracking of principal components across incremental steps.

A fresh eigendecomposition at every step is exact but leaves three kinds of
arbitrariness that show up as jumps in the PC series:

* the sign of each eigenvector;
* the basis chosen inside a (numerically) degenerate eigenspace;
* the sorted position of a component when two eigenvalues cross.

:func:`track` removes all three.  Each tracked *identity* is the component
that sat at a given sorted position at warm-up; rows of the corrected
loadings follow identities, not the current eigenvalue order.  Eigenvalues
are carried along unchanged, so the spectrum is exact as a multiset and only
row order, orientation and the basis within degenerate groups may differ
from the raw decomposition.
"""

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .config import EPS_FLOOR
from .eigen import EigenState
from .errors import DimensionError

SIGN = "sign"
REBASE = "degenerate-rebase"
CROSSING = "crossing-swap"
CORRECTION_KINDS = (SIGN, REBASE, CROSSING)

# A rebase whose rotation moves the block by less than this is not logged.
REBASE_LOG_TOL = 1e-12

Correction = namedtuple("Correction", "step kind indices")


@dataclass(frozen=True)
class DegeneracyPartition:
    """Contiguous groups of sorted indices, each a half-open ``range``."""

    groups: tuple

    def group_index(self):
        """Array mapping each sorted position to the id of its group."""
        m = self.groups[-1].stop if self.groups else 0
        out = np.empty(m, dtype=np.intp)
        for g, r in enumerate(self.groups):
            out[r.start:r.stop] = g
        return out


@dataclass(frozen=True)
class TrackerState:
    """Tracked basis after the most recent step.

    ``loadings`` / ``eigenvalues`` are in identity order.  ``permutation[i]``
    is the identity currently at sorted position ``i``.  Only the latest
    step's corrections are kept (``last_corrections``); long-run history is
    the caller's to record, which keeps the state O(m^2).
    """

    loadings: np.ndarray
    eigenvalues: np.ndarray
    permutation: np.ndarray
    sign_flips: np.ndarray
    step: int = 0
    counts: dict = field(default_factory=lambda: dict.fromkeys(CORRECTION_KINDS, 0))
    last_corrections: tuple = ()

    @classmethod
    def initial(cls, eig, step=0):
        m = eig.m
        return cls(
            eig.loadings.copy(),
            eig.eigenvalues.copy(),
            np.arange(m),
            np.zeros(m, dtype=np.int64),
            step,
        )

    @property
    def positions(self):
        """``positions[j]`` is the sorted position of identity ``j``."""
        return np.argsort(self.permutation)

    def sorted_view(self):
        """The tracked state as an EigenState in current sorted order."""
        return EigenState(self.eigenvalues[self.permutation], self.loadings[self.permutation])


def detect_degenerate_groups(eigenvalues, eps_rel, eps_floor=EPS_FLOOR):
    """Split a descending spectrum into runs of near-equal eigenvalues.

    Neighbours ``i, i+1`` share a group iff
    ``lam[i] - lam[i+1] < eps_rel * max(lam[0], eps_floor)``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        return DegeneracyPartition(())
    threshold = eps_rel * max(lam[0], eps_floor)
    breaks = np.flatnonzero(lam[:-1] - lam[1:] >= threshold) + 1
    edges = [0, *breaks.tolist(), lam.size]
    return DegeneracyPartition(tuple(range(a, b) for a, b in zip(edges[:-1], edges[1:])))


def align_signs(prev_row, new_row):
    """Return ``new_row`` or ``-new_row``, whichever points along ``prev_row``.

    A zero dot product keeps ``new_row`` as is.
    """
    new_row = np.asarray(new_row, dtype=float)
    if float(np.dot(prev_row, new_row)) < 0.0:
        return -new_row
    return new_row


def align_degenerate_block(prev_block, new_block):
    """Rotate ``new_block`` within its span to be as close as possible to ``prev_block``.

    Solves the orthogonal Procrustes problem ``min ||R @ new - prev||_F`` over
    orthogonal ``k x k`` matrices ``R`` and returns ``R @ new``.  The rows stay
    orthonormal and span the same subspace as ``new_block``.
    """
    prev_block = np.atleast_2d(np.asarray(prev_block, dtype=float))
    new_block = np.atleast_2d(np.asarray(new_block, dtype=float))
    if prev_block.shape != new_block.shape:
        raise DimensionError(f"block shapes differ: {prev_block.shape} vs {new_block.shape}")
    if new_block.shape[0] == 1:
        return align_signs(prev_block[0], new_block[0])[None, :]
    u, _, vt = np.linalg.svd(new_block @ prev_block.T)
    return (vt.T @ u.T) @ new_block


def crossing_window(partition, m):
    """``allowed[i, p]``: may new sorted index ``i`` take the identity that sat at
    previous position ``p``?

    Each degenerate group is widened by one index on either side, so a
    component can move at most one slot past its group per step.
    """
    allowed = np.zeros((m, m), dtype=bool)
    for g in partition.groups:
        lo = max(g.start - 1, 0)
        hi = min(g.stop + 1, m)
        allowed[g.start:g.stop, lo:hi] = True
    return allowed


def _greedy(score, allowed):
    """Greedy best-first bijection on a score matrix restricted to ``allowed``.

    Returns ``assign[i] = column`` with -1 for rows left unmatched.
    """
    m = score.shape[0]
    rows, cols = np.nonzero(allowed)
    order = np.argsort(-score[rows, cols], kind="stable")
    assign = np.full(m, -1, dtype=np.intp)
    taken = np.zeros(m, dtype=bool)
    left = m
    for k in order:
        i, j = rows[k], cols[k]
        if assign[i] < 0 and not taken[j]:
            assign[i] = j
            taken[j] = True
            left -= 1
            if left == 0:
                break
    return assign


def match_components(prev, new, partition):
    """Assign each new eigenvector (sorted index) a tracked identity.

    Greedily pairs the largest ``|dot(prev row, new row)|`` first, restricted
    to the crossing window.  Returns ``perm`` with ``perm[i]`` the identity
    given to new sorted index ``i``.
    """
    m = new.m
    if prev.loadings.shape != new.loadings.shape:
        raise DimensionError(f"tracker has {prev.loadings.shape}, new state {new.loadings.shape}")
    # Columns indexed by previous sorted position.
    score = np.abs(new.loadings @ prev.loadings[prev.permutation].T)
    allowed = crossing_window(partition, m)

    # Fast path: every diagonal entry dominates its row and column, so greedy
    # would keep everyone in place.
    masked = np.where(allowed, score, -1.0)
    d = np.diagonal(masked)
    off = masked - np.diag(np.full(m, np.inf))
    if np.all(d > off.max(axis=1)) and np.all(d > off.max(axis=0)):
        return prev.permutation.copy()

    assign = _greedy(score, allowed)
    free = np.flatnonzero(assign < 0)
    if free.size:
        used = np.zeros(m, dtype=bool)
        used[assign[assign >= 0]] = True
        assign[free] = np.flatnonzero(~used)
    return prev.permutation[assign]


def _crossing_cycles(prev_pos, new_pos, group_of):
    """Cycles of the position map that move an identity across a group boundary."""
    m = prev_pos.size
    # successor[p] = where the identity formerly at position p now sits
    successor = np.empty(m, dtype=np.intp)
    successor[prev_pos] = new_pos
    identity_at = np.empty(m, dtype=np.intp)
    identity_at[prev_pos] = np.arange(m)
    seen = np.zeros(m, dtype=bool)
    cycles = []
    for start in range(m):
        if seen[start] or successor[start] == start:
            seen[start] = True
            continue
        cyc = []
        p = start
        while not seen[p]:
            seen[p] = True
            cyc.append(p)
            p = successor[p]
        if any(group_of[q] != group_of[successor[q]] for q in cyc):
            cycles.append(tuple(sorted(int(identity_at[q]) for q in cyc)))
    return cycles


@njit(cache=True)
def _quiet_step(vals, new_rows, prev_rows, threshold):
    """Signed dots ``new_rows[i] . prev_rows[i]`` if the step needs neither a
    rebase nor a crossing swap, else an empty array.

    Quiet means: no eigengap below ``threshold`` (all groups singletons, so
    the crossing window is the band ``|i - p| <= 1``) and every diagonal
    overlap beats its in-window neighbours, which is when greedy matching
    keeps everyone in place.
    """
    m = vals.shape[0]
    for i in range(m - 1):
        if vals[i] - vals[i + 1] < threshold:
            return np.empty(0)
    dots = np.empty(m)
    upper = np.zeros(m)  # |new_i . prev_{i+1}|
    lower = np.zeros(m)  # |new_{i+1} . prev_i|
    for i in range(m):
        s = 0.0
        for k in range(m):
            s += new_rows[i, k] * prev_rows[i, k]
        dots[i] = s
        if i + 1 < m:
            su = 0.0
            sl = 0.0
            for k in range(m):
                su += new_rows[i, k] * prev_rows[i + 1, k]
                sl += new_rows[i + 1, k] * prev_rows[i, k]
            upper[i] = abs(su)
            lower[i] = abs(sl)
    for i in range(m):
        d = abs(dots[i])
        if i + 1 < m and (d <= upper[i] or d <= lower[i]):
            return np.empty(0)
        if i > 0 and (d <= upper[i - 1] or d <= lower[i - 1]):
            return np.empty(0)
    return dots


def _track_quiet(prev, new, dots):
    step = prev.step + 1
    pos = prev.positions
    rows = new.loadings[pos]
    vals = new.eigenvalues[pos]
    flip = prev.permutation[dots < 0.0]
    if flip.size == 0:
        state = TrackerState(rows, vals, prev.permutation, prev.sign_flips, step, prev.counts, ())
        return state, EigenState(vals, rows)
    rows[flip] *= -1.0
    flips = prev.sign_flips.copy()
    flips[flip] += 1
    corrections = tuple(Correction(step, SIGN, (int(j),)) for j in np.sort(flip))
    counts = dict(prev.counts)
    counts[SIGN] += len(corrections)
    state = TrackerState(rows, vals, prev.permutation, flips, step, counts, corrections)
    return state, EigenState(vals, rows)


def track(prev, new, eps_rel):
    """One tracking step: crossing match, then per-group rebasing / sign fix.

    Returns ``(state, corrected)`` where ``corrected`` is an EigenState in
    identity order.
    """
    if prev.loadings.shape != new.loadings.shape:
        raise DimensionError(f"tracker has {prev.loadings.shape}, new state {new.loadings.shape}")
    lam = new.eigenvalues
    threshold = eps_rel * max(lam[0], EPS_FLOOR)
    dots = _quiet_step(lam, new.loadings, prev.loadings[prev.permutation], threshold)
    if dots.size:
        return _track_quiet(prev, new, dots)

    step = prev.step + 1
    partition = detect_degenerate_groups(lam, eps_rel)
    perm = match_components(prev, new, partition)
    new_pos = np.argsort(perm)
    prev_pos = prev.positions
    corrections = [
        Correction(step, CROSSING, ids)
        for ids in _crossing_cycles(prev_pos, new_pos, partition.group_index())
    ]

    rows = new.loadings[new_pos].copy()
    vals = new.eigenvalues[new_pos].copy()
    flips = prev.sign_flips.copy()

    singles = np.array([perm[g.start] for g in partition.groups if len(g) == 1], dtype=np.intp)
    if singles.size:
        dots = np.einsum("ij,ij->i", rows[singles], prev.loadings[singles])
        flip = singles[dots < 0.0]
        rows[flip] *= -1.0
        flips[flip] += 1
        corrections.extend(Correction(step, SIGN, (int(j),)) for j in flip)

    for g in partition.groups:
        if len(g) < 2:
            continue
        ids = perm[g.start:g.stop]
        aligned = align_degenerate_block(prev.loadings[ids], rows[ids])
        if np.abs(aligned - rows[ids]).max() > REBASE_LOG_TOL:
            corrections.append(Correction(step, REBASE, tuple(sorted(int(j) for j in ids))))
        rows[ids] = aligned

    counts = dict(prev.counts)
    for c in corrections:
        counts[c.kind] += 1
    state = TrackerState(rows, vals, perm, flips, step, counts, tuple(corrections))
    return state, EigenState(vals, rows)


def discontinuity_decomposition(z_prev, z_curr, c_prev, c_curr):
    """Split ``p_curr - p_prev`` into a data term and a coefficient-change term.

    ``sample_term = (z_curr - z_prev) @ c_curr.T`` is what a fixed transform
    would also produce; ``coefficient_term = z_prev @ (c_curr - c_prev).T`` is
    the jump caused by the loadings changing between steps.
    """
    z_prev = np.asarray(z_prev, dtype=float)
    z_curr = np.asarray(z_curr, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    c_curr = np.asarray(c_curr, dtype=float)
    if z_prev.shape != z_curr.shape or c_prev.shape != c_curr.shape:
        raise DimensionError("z or C shapes differ between steps")
    if c_curr.ndim != 2 or z_curr.shape[-1] != c_curr.shape[1]:
        raise DimensionError(f"z width {z_curr.shape[-1]} does not match loadings {c_curr.shape}")
    return (z_curr - z_prev) @ c_curr.T, z_prev @ (c_curr - c_prev).T
