"""Budget-annotated problem instances consumed by the solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelStats
from .errors import InputError


@dataclass
class TotalPowerProblem:
    """Maximize destination SNR subject to Ps + P_r <= P0."""

    stats: ChannelStats
    P0: float

    def __post_init__(self):
        if self.P0 <= 0:
            raise InputError("P0 must be positive")


@dataclass
class IndivPowerProblem:
    """Maximize destination SNR subject to per-relay caps
    (Ps D_kk + sigma^2) |w_k|^2 <= P_k with the source power fixed."""

    stats: ChannelStats
    Ps: float
    P: np.ndarray

    def __post_init__(self):
        if self.Ps <= 0:
            raise InputError("Ps must be positive")
        self.P = np.asarray(self.P, dtype=float).ravel()
        if self.P.size != self.stats.n:
            raise InputError(
                f"need one power cap per relay: got {self.P.size} for n={self.stats.n}"
            )
        if (self.P <= 0).any():
            raise InputError("relay power caps must be positive")

    @property
    def n(self) -> int:
        return self.stats.n

    def caps(self) -> np.ndarray:
        """Per-relay magnitude bounds beta_k = sqrt(P_k/(Ps D_kk + sigma^2))."""
        return np.sqrt(self.P / (self.Ps * self.stats.D + self.stats.sigma2))

    def slacks(self, w) -> np.ndarray:
        """P_k - (Ps D_kk + sigma^2)|w_k|^2, nonnegative iff w feasible."""
        w = np.asarray(w, dtype=complex).ravel()
        return self.P - (self.Ps * self.stats.D + self.stats.sigma2) * np.abs(w) ** 2
