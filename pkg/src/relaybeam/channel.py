"""Second-order channel statistics and the SNR / power formulas.

The relay network is described by three second-order quantities: the
diagonal D of source-to-relay gain powers E|f_i|^2, the covariance
R = E[h h^dagger] of the compound gains h_i = f_i g_i, and the covariance
Q = E[g g^dagger] of the relay-to-destination gains.  Under the Rician
model f_i = fbar_i + sqrt(psi_i) ftilde_i, g_j = gbar_j + sqrt(phi_j)
gtilde_j with independent zero-mean unit-variance perturbations, all three
have closed forms; ``monte_carlo_stats`` validates them empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .linalg import check_vector, hermitian, qform


@dataclass
class RicianParams:
    """Per-relay Rician fading parameters (zero means = Rayleigh)."""

    f_mean: np.ndarray   # fbar, complex length n
    f_var: np.ndarray    # psi >= 0
    g_mean: np.ndarray   # gbar, complex length n
    g_var: np.ndarray    # phi >= 0

    def __post_init__(self):
        self.f_mean = check_vector(self.f_mean, name="f_mean")
        self.g_mean = check_vector(self.g_mean, name="g_mean")
        self.f_var = np.asarray(self.f_var, dtype=float).ravel()
        self.g_var = np.asarray(self.g_var, dtype=float).ravel()
        n = self.f_mean.size
        if not (self.f_var.size == self.g_mean.size == self.g_var.size == n):
            raise InputError("Rician parameter lists must share one length")
        if (self.f_var < 0).any() or (self.g_var < 0).any():
            raise InputError("variances must be nonnegative")
        if np.all(np.abs(self.f_mean) ** 2 + self.f_var == 0):
            raise InputError("all source-relay channels have zero power")

    @property
    def n(self) -> int:
        return self.f_mean.size


@dataclass
class ChannelStats:
    """The triple (D, R, Q) plus the common noise variance sigma^2."""

    D: np.ndarray        # nonnegative, length n (diagonal entries)
    R: np.ndarray        # Hermitian PSD n x n
    Q: np.ndarray        # Hermitian PSD n x n
    sigma2: float = 1.0

    def __post_init__(self):
        self.D = np.asarray(self.D, dtype=float).ravel()
        self.R = hermitian(self.R, name="R")
        self.Q = hermitian(self.Q, name="Q")
        n = self.D.size
        if self.R.shape != (n, n) or self.Q.shape != (n, n):
            raise InputError("D, R, Q dimensions disagree")
        if (self.D < 0).any():
            raise InputError("D must be nonnegative")
        if self.sigma2 <= 0:
            raise InputError("sigma2 must be positive")
        for name, M in (("R", self.R), ("Q", self.Q)):
            lam = np.linalg.eigvalsh(M)[0]
            if lam < -1e-9 * max(1.0, np.abs(M).max()):
                raise InputError(
                    f"{name} is not PSD (lambda_min = {lam:.3e}); covariance "
                    "matrices must be positive semidefinite")

    @property
    def n(self) -> int:
        return self.D.size

    def is_diagonal(self, rtol: float = 1e-12) -> bool:
        """True when R and Q carry negligible off-diagonal mass."""
        def offdiag_small(M):
            off = M - np.diag(np.diag(M))
            return np.abs(off).sum() <= rtol * max(np.abs(np.trace(M)), 1e-300)
        return offdiag_small(self.R) and offdiag_small(self.Q)


@dataclass
class BeamformingSolution:
    """A weight vector with its achieved SNR and per-constraint slacks."""

    w: np.ndarray
    Ps: float
    snr: float
    feasibility: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.snr) if self.snr > 0 else -np.inf


def build_stats(p: RicianParams, sigma2: float = 1.0) -> ChannelStats:
    """Closed-form (D, R, Q) for the Rician model.

    D_ii = |fbar_i|^2 + psi_i;  Q_ij = gbar_i gbar_j^* + sqrt(phi_i phi_j) delta_ij;
    R_ij is the entrywise product of the f- and g-covariances because f and g
    are independent and h_i = f_i g_i.
    """
    D = np.abs(p.f_mean) ** 2 + p.f_var
    Q = np.outer(p.g_mean, p.g_mean.conj()) + np.diag(p.g_var)
    Rf = np.outer(p.f_mean, p.f_mean.conj()) + np.diag(p.f_var)
    R = Rf * Q
    return ChannelStats(D=D, R=hermitian(R, name="R"), Q=hermitian(Q, name="Q"),
                        sigma2=float(sigma2))


def snr(stats: ChannelStats, Ps: float, w) -> float:
    """Destination SNR (Ps/sigma^2) * (w^H R w) / (1 + w^H Q w)."""
    if Ps <= 0:
        raise InputError("Ps must be positive")
    w = np.asarray(w, dtype=complex).ravel()
    return (Ps / stats.sigma2) * qform(stats.R, w) / (1.0 + qform(stats.Q, w))


def powers(stats: ChannelStats, Ps: float, w):
    """Total and per-relay transmit powers for weights w.

    Returns ``(P_r, P_ri)`` with P_r = Ps w^H D w + sigma^2 w^H w and
    P_ri = (Ps D_ii + sigma^2) |w_i|^2; the per-relay values sum to P_r.
    """
    if Ps <= 0:
        raise InputError("Ps must be positive")
    w = np.asarray(w, dtype=complex).ravel()
    P_ri = (Ps * stats.D + stats.sigma2) * np.abs(w) ** 2
    return float(P_ri.sum()), P_ri


def monte_carlo_stats(p: RicianParams, samples: int, seed: int,
                      batch: int = 20000):
    """Empirical (D, R, Q) from circularly-symmetric Gaussian draws.

    Deterministic given ``seed``.  Returns ``(D_hat, R_hat, Q_hat)``.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = p.n
    D_acc = np.zeros(n)
    R_acc = np.zeros((n, n), dtype=complex)
    Q_acc = np.zeros((n, n), dtype=complex)
    done = 0
    sf = np.sqrt(p.f_var)
    sg = np.sqrt(p.g_var)
    while done < samples:
        b = min(batch, samples - done)
        ft = (rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n))) / np.sqrt(2)
        gt = (rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n))) / np.sqrt(2)
        f = p.f_mean + sf * ft
        g = p.g_mean + sg * gt
        h = f * g
        D_acc += (np.abs(f) ** 2).sum(axis=0)
        R_acc += h.conj().T @ h
        Q_acc += g.conj().T @ g
        done += b
    # accumulators hold sum of conj-outer products transposed; fix orientation
    R_hat = (R_acc / samples).conj()
    Q_hat = (Q_acc / samples).conj()
    return D_acc / samples, hermitian(R_hat, name="R_hat"), hermitian(Q_hat, name="Q_hat")
