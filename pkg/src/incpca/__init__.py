"""Exact incremental PCA with continuity tracking of the principal components."""

from .config import PcaConfig
from .continuity import Correction, TrackerState, discontinuity_decomposition, track
from .covariance import CovarianceState, init_covariance, update_covariance
from .eigen import EigenState, canonicalize, eigh_descending, project, reconstruct
from .engine import Diagnostics, IncrementalPCA, PcaStepResult
from .errors import (
    DataError,
    DegenerateVariableError,
    DimensionError,
    IncPCAError,
    InsufficientDataError,
    NonFiniteError,
    NumericalError,
)
from .moments import MomentAccumulator, Standardization, standardize, statistics, update_moments
from .oracle import BatchResult, batch_pca

__all__ = [
    "BatchResult",
    "Correction",
    "CovarianceState",
    "DataError",
    "DegenerateVariableError",
    "Diagnostics",
    "DimensionError",
    "EigenState",
    "IncPCAError",
    "IncrementalPCA",
    "InsufficientDataError",
    "MomentAccumulator",
    "NonFiniteError",
    "NumericalError",
    "PcaConfig",
    "PcaStepResult",
    "Standardization",
    "TrackerState",
    "batch_pca",
    "canonicalize",
    "discontinuity_decomposition",
    "eigh_descending",
    "init_covariance",
    "project",
    "reconstruct",
    "standardize",
    "statistics",
    "track",
    "update_covariance",
    "update_moments",
]

__version__ = "0.1.0"
