from dataclasses import dataclass

from .moments import ZERO_VARIANCE_POLICIES

DEFAULT_EPS_REL = 1e-6
EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class PcaConfig:
    """Engine settings.

    ``n_start`` defaults to ``m + 1`` so the warm-up covariance can be full
    rank.  ``eps_rel`` is the relative eigengap below which neighbouring
    components are treated as degenerate by the continuity tracker.
    """

    m: int
    n_start: int = None
    centering: bool = True
    scaling: bool = True
    continuity: bool = True
    eps_rel: float = DEFAULT_EPS_REL
    zero_variance: str = "error"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.n_start is None:
            object.__setattr__(self, "n_start", self.m + 1)
        if self.n_start < 2:
            raise ValueError(f"n_start must be >= 2, got {self.n_start}")
        if not self.eps_rel > 0:
            raise ValueError(f"eps_rel must be positive, got {self.eps_rel}")
        if self.zero_variance not in ZERO_VARIANCE_POLICIES:
            raise ValueError(f"zero_variance must be one of {ZERO_VARIANCE_POLICIES}")
