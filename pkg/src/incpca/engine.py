"""Streaming PCA engine: warm-up, exact per-sample updates, optional tracking."""

from dataclasses import dataclass, field

import numpy as np

from . import continuity
from .config import PcaConfig
from .covariance import CovarianceState, covariance_from_block, frobenius_distance, update_covariance
from .eigen import EigenState, eigh_descending, eigh_trusted, project, reconstruct
from .errors import DimensionError, InsufficientDataError
from .moments import MomentAccumulator, as_sample, standardize, statistics, update_moments


@dataclass(frozen=True)
class PcaStepResult:
    step: int
    pcs: np.ndarray
    eigenvalues: np.ndarray
    q_frobenius_to_reference: float = None
    corrections: tuple = ()


@dataclass
class Diagnostics:
    step: int
    eigenvalues: np.ndarray
    explained: np.ndarray
    cumulative_explained: np.ndarray
    frob_ref: float
    correction_counts: dict
    eps_rel: float
    corrections: tuple = field(default=())


def explained_fractions(eigenvalues):
    lam = np.maximum(np.asarray(eigenvalues, dtype=float), 0.0)
    total = lam.sum()
    if total <= 0.0:
        return np.zeros_like(lam)
    return lam / total


class IncrementalPCA:
    """Exact incremental PCA over a stream of m-dimensional samples.

    Build one with :meth:`warmup`, then feed samples to :meth:`push`.  The
    engine keeps only O(m^2) state: running sums, the current covariance, the
    current (tracked) eigendecomposition, plus the fixed-size warm-up PC block.

    Example
    -------
    >>> eng = IncrementalPCA.warmup(x[:11], PcaConfig(m=10))
    >>> for row in x[11:]:
    ...     result = eng.push(row)
    """

    def __init__(self, config, acc, cov, raw, tracker, stats, warmup_pcs):
        self.config = config
        self.acc = acc
        self.cov = cov
        self.raw = raw
        self.tracker = tracker
        self.stats = stats
        self.warmup_pcs = warmup_pcs
        self.reference_q = None
        self.last_corrections = ()

    @classmethod
    def warmup(cls, samples, config=None):
        x = np.atleast_2d(np.asarray(samples, dtype=float))
        if config is None:
            config = PcaConfig(m=x.shape[1], n_start=max(x.shape[0], 2))
        if x.shape[1] != config.m:
            raise DimensionError(f"expected {config.m} columns, got {x.shape[1]}")
        if x.shape[0] != config.n_start:
            raise InsufficientDataError(
                f"warm-up needs exactly n_start={config.n_start} samples, got {x.shape[0]}"
            )
        acc = MomentAccumulator.empty(config.m)
        for row in x:
            acc = update_moments(acc, row)
        stats = statistics(acc, config.centering, config.scaling, config.zero_variance)
        cov = covariance_from_block(x, stats)
        raw = eigh_descending(cov.q)
        tracker = continuity.TrackerState.initial(raw, step=acc.n)
        warmup_pcs = project(standardize(x, stats), raw.loadings)
        return cls(config, acc, cov, raw, tracker, stats, warmup_pcs)

    @property
    def n(self):
        return self.acc.n

    @property
    def m(self):
        return self.config.m

    @property
    def q(self):
        return self.cov.q

    @property
    def eigen(self):
        """Current decomposition: tracked (identity order) or raw canonical."""
        if self.config.continuity:
            return EigenState(self.tracker.eigenvalues, self.tracker.loadings)
        return self.raw

    @property
    def loadings(self):
        return self.eigen.loadings

    def push(self, x):
        """Fold one sample in and return its PC values under the new transform.

        All-or-nothing: on any error the engine is left exactly as it was.
        """
        x = as_sample(x, self.m)
        cfg = self.config
        n = self.acc.n
        acc = update_moments(self.acc, x)
        stats = statistics(acc, cfg.centering, cfg.scaling, cfg.zero_variance)
        cov = update_covariance(self.cov, self.stats, stats, x, n)
        raw = eigh_trusted(cov.q)
        if cfg.continuity:
            tracker, eig = continuity.track(self.tracker, raw, cfg.eps_rel)
            corrections = tracker.last_corrections
        else:
            tracker, eig, corrections = self.tracker, raw, ()
        pcs = project(standardize(x, stats), eig.loadings)
        frob = None
        if self.reference_q is not None:
            frob = frobenius_distance(cov.q, self.reference_q)

        self.acc, self.stats, self.cov, self.raw, self.tracker = acc, stats, cov, raw, tracker
        self.last_corrections = corrections
        return PcaStepResult(acc.n, pcs, np.maximum(eig.eigenvalues, 0.0), frob, corrections)

    def transform(self, x):
        """PC values of ``x`` under the current transform; no state change."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.m:
            raise DimensionError(f"expected {self.m} values, got {x.shape[-1]}")
        return project(standardize(x, self.stats), self.loadings)

    def inverse(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.m:
            raise DimensionError(f"expected {self.m} values, got {p.shape[-1]}")
        return reconstruct(p, self.loadings, self.stats)

    def diagnostics(self, reference_q=None):
        if reference_q is None:
            reference_q = self.reference_q
        lam = self.eigen.eigenvalues
        frac = explained_fractions(lam)
        frob = None if reference_q is None else frobenius_distance(self.q, reference_q)
        return Diagnostics(
            step=self.n,
            eigenvalues=lam.copy(),
            explained=frac,
            cumulative_explained=np.cumsum(frac),
            frob_ref=frob,
            correction_counts=dict(self.tracker.counts),
            eps_rel=self.config.eps_rel,
            corrections=self.last_corrections,
        )

    def snapshot(self):
        """Independent copy, safe to read from another thread."""
        other = IncrementalPCA(
            self.config, self.acc, self.cov, self.raw, self.tracker, self.stats,
            self.warmup_pcs.copy(),
        )
        other.reference_q = None if self.reference_q is None else self.reference_q.copy()
        other.last_corrections = self.last_corrections
        return other

    def state_size(self):
        """Total element count of every array and container the engine holds."""
        return _size(self.__dict__)


def _size(obj, _seen=None):
    seen = set() if _seen is None else _seen
    if id(obj) in seen:
        return 0
    seen.add(id(obj))
    if isinstance(obj, np.ndarray):
        return int(obj.size)
    if isinstance(obj, dict):
        return len(obj) + sum(_size(v, seen) for v in obj.values())
    if isinstance(obj, (list, tuple, set, frozenset)):
        return len(obj) + sum(_size(v, seen) for v in obj)
    if hasattr(obj, "__dataclass_fields__"):
        return sum(_size(getattr(obj, f), seen) for f in obj.__dataclass_fields__)
    return 0
