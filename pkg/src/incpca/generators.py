"""Synthetic streams that exercise each continuity failure mode.

All generators are deterministic given ``seed``.

``random``
    Gaussian samples with a fixed correlation matrix whose spectrum has a
    handful of dominant components (five, or ``m`` if smaller) carrying about
    95% of the trace.  Per-variable offsets and units are random.
``crossing``
    Two latent signals whose variances change linearly in time in opposite
    directions, mixed at 45 degrees into variables 0 and 1.  Their
    instantaneous variances cross a third of the way through, so the
    first-half and second-half variances are ordered oppositely and the
    prefix (running) covariance sees the two components swap order near
    two thirds of the way.  The latent amplitudes follow the variance ramps
    exactly with random signs, which makes the prefix eigenvalue gap change
    monotonically and the crossing a single sharp step.  Extra variables come
    from a Gaussian background whose correlation spectrum stays out of the
    band the crossing pair sweeps (except for ``m = 3``, where the lone
    background variable sits at 1).  Sampling correlations with the
    background couple the pair, so with ``m > 2`` the swap becomes an
    avoided crossing smeared over a few steps; ``m = 2`` gives the clean case.
``degenerate``
    ``m - 2`` Gaussian variables with a separated spectrum plus two
    near-duplicate sensors (a base variable plus 1e-4 isotropic noise).  The
    duplicate residuals form a 2-D isotropic eigenspace whose eigengap stays
    far below the default degeneracy threshold at every prefix.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import random_correlation

SCENARIOS = ("random", "crossing", "degenerate")
DUPLICATE_NOISE = 1e-4


@dataclass
class Scenario:
    data: np.ndarray
    names: list
    scenario: str
    seed: int
    info: dict = field(default_factory=dict)


def _names(m):
    return [f"x{j + 1}" for j in range(m)]


def _correlated_gaussian(rng, n, eigs):
    """``n`` samples whose population correlation matrix has spectrum ``eigs``."""
    eigs = np.asarray(eigs, dtype=float)
    k = eigs.size
    if k == 1:
        return rng.standard_normal((n, 1))
    eigs = eigs * (k / eigs.sum())
    corr = random_correlation.rvs(eigs, random_state=rng)
    chol = np.linalg.cholesky(corr)
    return rng.standard_normal((n, k)) @ chol.T


def planted_spectrum(m, dominant=5, tail_share=0.05):
    """Descending correlation spectrum summing to ``m``.

    The leading ``min(dominant, m)`` values carry ``1 - tail_share`` of the
    trace and are well separated; the tail decays geometrically.
    """
    d = min(dominant, m)
    head = np.linspace(2.0, 1.0, d) ** 2
    if m == d:
        return head * (m / head.sum())
    tail = np.geomspace(1.0, 0.1, m - d)
    head = head * ((1.0 - tail_share) * m / head.sum())
    tail = tail * (tail_share * m / tail.sum())
    return np.concatenate([head, tail])


def _units(rng, m):
    return rng.uniform(-5.0, 5.0, m), rng.uniform(0.5, 3.0, m)


def random_stream(m, n, seed=0):
    rng = np.random.default_rng(seed)
    spectrum = planted_spectrum(m)
    g = _correlated_gaussian(rng, n, spectrum)
    offset, unit = _units(rng, m)
    return Scenario(g * unit + offset, _names(m), "random", seed, {"spectrum": spectrum})


def _background_spectrum(k):
    """Correlation spectrum summing to ``k`` with nothing in ``[0.5, 1.5]``."""
    n_high = max(1, k // 2)
    lows = np.linspace(0.2, 0.02, k - n_high)
    highs = np.linspace(1.3, 1.0, n_high)
    highs = highs * ((k - lows.sum()) / highs.sum())
    return np.concatenate([highs, lows])


def crossing_stream(m, n, seed=0, start=(1.45, 0.55), end=(0.1, 1.9)):
    """See module docstring.  ``info['crossing_step']`` is the first sample
    count at which the prefix correlation of variables 0 and 1 has turned
    negative, i.e. where the two planted components have swapped order."""
    if m < 2:
        raise ValueError("crossing scenario needs m >= 2")
    rng = np.random.default_rng(seed)
    t = np.arange(n) / max(n - 1, 1)
    var_f = start[0] + (end[0] - start[0]) * t
    var_g = start[1] + (end[1] - start[1]) * t
    sf = rng.choice([-1.0, 1.0], n)
    sg = rng.choice([-1.0, 1.0], n)
    # opening pair: f spread, g not, so the very first prefixes already have
    # the start-of-stream ordering
    sf[:2] = (1.0, -1.0)
    sg[:2] = (1.0, 1.0)
    f = np.sqrt(var_f) * sf
    g = np.sqrt(var_g) * sg
    x = np.empty((n, m))
    x[:, 0] = (f + g) / np.sqrt(2.0)
    x[:, 1] = (f - g) / np.sqrt(2.0)
    if m == 3:
        x[:, 2] = rng.standard_normal(n)
    elif m > 3:
        x[:, 2:] = _correlated_gaussian(rng, n, _background_spectrum(m - 2))

    k = np.arange(1, n + 1)
    cf = np.cumsum(f)
    cg = np.cumsum(g)
    # prefix (n-1) * (var f - var g); its sign is the sign of corr(x0, x1)
    diff = np.cumsum(f * f) - cf * cf / k - (np.cumsum(g * g) - cg * cg / k)
    neg = np.flatnonzero(diff[1:] < 0.0)
    crossing = int(neg[0]) + 2 if neg.size else None
    sign_changes = int(np.count_nonzero(np.diff(np.sign(diff[1:])) != 0))
    info = {
        "crossing_step": crossing,
        "sign_changes": sign_changes,
        "instantaneous_crossing": float(n * (start[0] - start[1]) /
                                        ((start[0] - start[1]) - (end[0] - end[1]))),
        "pair": (0, 1),
    }
    return Scenario(x, _names(m), "crossing", seed, info)


def degenerate_stream(m, n, seed=0):
    if m < 3:
        raise ValueError("degenerate scenario needs m >= 3")
    rng = np.random.default_rng(seed)
    k = m - 2
    base = _correlated_gaussian(rng, n, np.geomspace(3.0, 0.3, k) if k > 1 else [1.0])
    src = (0, 1 if k > 1 else 0)
    dup = base[:, src] + DUPLICATE_NOISE * rng.standard_normal((n, 2))
    x = np.concatenate([base, dup], axis=1)
    offset, unit = _units(rng, m)
    # duplicates keep their source's units so the residual stays isotropic
    unit[k:] = unit[list(src)]
    offset[k:] = offset[list(src)]
    info = {"block_variables": (src[0], src[1], k, k + 1)}
    return Scenario(x * unit + offset, _names(m), "degenerate", seed, info)


def sign_flip_stream(n=200, seed=0, angles=(15.0, 75.0), noise=0.05):
    """Two variables whose dominant axis turns from ``angles[0]`` to
    ``angles[1]`` degrees.  Meant for the unscaled covariance: its minor
    eigenvector changes which entry is largest in magnitude as the axis passes
    45 degrees, so the canonical sign flips at some step."""
    rng = np.random.default_rng(seed)
    theta = np.deg2rad(np.linspace(angles[0], angles[1], n))
    amp = rng.standard_normal(n) * 3.0
    axis = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    x = amp[:, None] * axis + noise * rng.standard_normal((n, 2))
    return Scenario(x, _names(2), "sign-flip", seed, {})


def generate(scenario, m, n, seed=0):
    if scenario == "random":
        return random_stream(m, n, seed)
    if scenario == "crossing":
        return crossing_stream(m, n, seed)
    if scenario == "degenerate":
        return degenerate_stream(m, n, seed)
    raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
