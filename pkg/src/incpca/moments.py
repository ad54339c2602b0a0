"""Running sums of a sample stream and the z-score statistics derived from them.

Only the count ``n``, the per-variable sum ``a`` and the per-variable sum of
squares ``b`` are kept, so the state is O(m) no matter how long the stream is.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVariableError,
    DimensionError,
    InsufficientDataError,
    NonFiniteError,
    NumericalError,
)

ZERO_VARIANCE_POLICIES = ("error", "substitute-one")

# Relative size of the band around zero in which the radicand b - a^2/n is
# treated as round-off rather than signal.
CLAMP_REL = 1e-10
ROUNDOFF_REL = 16 * np.finfo(float).eps


def as_sample(x, m=None):
    """Validate one observation and return it as a float vector."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if m is not None and arr.shape[0] != m:
        raise DimensionError(f"expected {m} values, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NonFiniteError(f"non-finite value {arr[bad]!r} at variable {bad}")
    return arr


@dataclass(frozen=True)
class MomentAccumulator:
    n: int
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def empty(cls, m):
        return cls(0, np.zeros(m), np.zeros(m))

    @classmethod
    def from_rows(cls, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        acc = cls.empty(rows.shape[1])
        for row in rows:
            acc = update_moments(acc, row)
        return acc

    @property
    def m(self):
        return self.a.shape[0]

    def radicand(self):
        """``b - a**2 / n``, i.e. ``(n - 1)`` times the sample variance."""
        return self.b - self.a * self.a / self.n

    def cancellation_ratio(self):
        """Per-variable ``b / (b - a**2/n)``.

        Large values (say above 1e8) mean the variance has lost most of its
        significant digits to cancellation; ``inf`` flags a zero radicand.
        """
        if self.n < 1:
            raise InsufficientDataError("no samples accumulated")
        r = self.radicand()
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r > 0.0, self.b / np.where(r > 0.0, r, 1.0), np.inf)


def update_moments(acc, x):
    """Return a new accumulator with ``x`` folded in; ``acc`` is untouched."""
    x = as_sample(x, acc.m)
    return MomentAccumulator(acc.n + 1, acc.a + x, acc.b + x * x)


@dataclass(frozen=True)
class Standardization:
    """Statistics of a prefix and the toggles that decide how they apply.

    ``mean`` and ``stddev`` are the sample statistics; ``center`` and ``scale``
    are what actually gets subtracted / divided (zeros / ones when a toggle is
    off, 1 substituted for a zero ``stddev`` under the ``substitute-one``
    policy).
    """

    mean: np.ndarray
    stddev: np.ndarray
    centering: bool = True
    scaling: bool = True
    substituted: np.ndarray = None

    @property
    def center(self):
        return self.mean if self.centering else np.zeros_like(self.mean)

    @property
    def scale(self):
        if not self.scaling:
            return np.ones_like(self.stddev)
        if self.substituted is not None and self.substituted.any():
            return np.where(self.substituted, 1.0, self.stddev)
        return self.stddev

    def unstandardize(self, z):
        return np.asarray(z, dtype=float) * self.scale + self.center


def statistics(acc, centering=True, scaling=True, zero_variance="error"):
    """Means and sample standard deviations (``n - 1`` denominator).

    Uses ``(n - 1) * var = b - a**2 / n``.  A radicand within the round-off
    band ``[-1e-10 * max(b, 1), 16 * eps * b]`` is taken as exactly zero; one
    below the band signals corrupted sums and raises :class:`NumericalError`.
    """
    if zero_variance not in ZERO_VARIANCE_POLICIES:
        raise ValueError(f"zero_variance must be one of {ZERO_VARIANCE_POLICIES}")
    n = acc.n
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, have {n}")
    mean = acc.a / n
    rad = acc.radicand()
    floor = -CLAMP_REL * np.maximum(acc.b, 1.0)
    if np.any(rad < floor):
        j = int(np.flatnonzero(rad < floor)[0])
        raise NumericalError(
            f"negative variance radicand {rad[j]:.3e} for variable {j}; sums are corrupted"
        )
    rad = np.where(rad <= ROUNDOFF_REL * acc.b, 0.0, rad)
    stddev = np.sqrt(rad / (n - 1))
    zero = stddev == 0.0
    if scaling and zero.any():
        if zero_variance == "error":
            cols = np.flatnonzero(zero).tolist()
            raise DegenerateVariableError(
                f"zero variance in variable(s) {cols} with scaling enabled", cols
            )
        return Standardization(mean, stddev, centering, scaling, zero)
    return Standardization(mean, stddev, centering, scaling, None)


def standardize(x, s):
    """``(x - center) / scale`` for one sample or a stack of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != s.mean.shape[0]:
        raise DimensionError(f"expected {s.mean.shape[0]} values, got {x.shape[-1]}")
    scale = s.scale
    if s.scaling and np.any(scale == 0.0):
        cols = np.flatnonzero(scale == 0.0).tolist()
        raise DegenerateVariableError(f"zero standard deviation in variable(s) {cols}", cols)
    return (x - s.center) / scale
