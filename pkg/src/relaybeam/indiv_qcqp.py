"""Homogeneous QCQP route for general R, Q under per-relay caps.

The per-relay problem is equivalent (up to scaling) to

    max w^H R w   s.t.   w^H A_k w <= 1,   A_k = c_k J_k + Q,

with c_k = (Ps D_kk + sigma^2)/P_k and J_k the k-th diagonal selector.
This module builds that instance, drives the SDP relaxation, extracts
rank-one solutions (exactly for n <= 3 via iterative rank reduction on the
optimal face), runs the Gaussian-random-procedure baseline, and maps QCQP
points back to budget-feasible weight vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import BeamformingSolution, snr
from .errors import InputError, ScopeError
from .linalg import hermitian, qform
from .problems import IndivPowerProblem
from .sdp import SdpProblem, solve_relaxation

GRP_BATCH = 65536   # fixed batch so the sample stream is a prefix-stable counter


@dataclass
class QcqpInstance:
    R: np.ndarray
    A: list[np.ndarray]
    scale_coeffs: np.ndarray     # c_k = (Ps D_kk + sigma^2)/P_k

    @property
    def n(self) -> int:
        return self.R.shape[0]

    def constraint_values(self, w) -> np.ndarray:
        return np.array([qform(Ak, w) for Ak in self.A])


def build_qcqp(p: IndivPowerProblem) -> QcqpInstance:
    coeffs = (p.Ps * p.stats.D + p.stats.sigma2) / p.P
    A = []
    for k, ck in enumerate(coeffs):
        Ak = p.stats.Q.copy()
        Ak[k, k] += ck
        A.append(hermitian(Ak))
    return QcqpInstance(R=p.stats.R, A=A, scale_coeffs=coeffs)


def qcqp_objective(q: QcqpInstance, w) -> float:
    """w^H R w / max_k w^H A_k w: the QCQP value of w's ray."""
    return qform(q.R, w) / float(q.constraint_values(w).max())


def rescale_to_original(w_qcqp, q: QcqpInstance, p: IndivPowerProblem) -> BeamformingSolution:
    """Map a QCQP point back to the per-relay-cap problem.

    eta = max_k c_k |w_k|^2; w/sqrt(eta) is feasible with at least one cap
    active (the optimum always saturates some relay).
    """
    w = np.asarray(w_qcqp, dtype=complex).ravel()
    if not np.abs(w).max() > 0:
        raise InputError("cannot rescale the zero vector")
    eta = float((q.scale_coeffs * np.abs(w) ** 2).max())
    w = w / np.sqrt(eta)
    return BeamformingSolution(w=w, Ps=p.Ps, snr=snr(p.stats, p.Ps, w),
                               feasibility=p.slacks(w))


def solve_via_sdp(p: IndivPowerProblem, tol: float = 1e-8):
    """Solve the relaxation; return (sdp_solution, w or None).

    w is populated only when the relaxation comes back (numerically)
    rank one, in which case sqrt(lambda_max) times the top eigenvector is
    already optimal for the QCQP.
    """
    q = build_qcqp(p)
    sol = solve_relaxation(SdpProblem(objective=q.R, constraints=q.A), tol=tol)
    w = None
    if sol.rank_estimate == 1:
        vals, vecs = np.linalg.eigh(sol.X)
        w = np.sqrt(max(vals[-1], 0.0)) * vecs[:, -1]
    return q, sol, w


def rank_one_decompose(X, q: QcqpInstance, rank_tol: float = 1e-7,
                       active_tol: float = 1e-7, max_rounds: int = 64) -> np.ndarray:
    """Extract an objective-preserving feasible rank-one solution (n <= 3).

    Iterative rank reduction on the optimal face: write X = V V^H, find a
    nonzero Hermitian M with Tr(V^H A_k V M) = 0 for every active
    constraint (possible since the active count <= 3 < rank^2), and move
    X(tau) = V (I - tau M) V^H until either an eigenvalue of I - tau M
    hits zero (rank drops) or an inactive constraint becomes active (the
    active set grows); both events are finite.  Active constraint values
    and, by complementary slackness, the objective are invariant along
    the path.
    """
    n = q.n
    if n > 3:
        raise ScopeError(
            "rank-one decomposition is only guaranteed for n <= 3; "
            "use coordinate descent or the p-norm solver")
    X = hermitian(X)
    A = q.A
    N = len(A)
    for _ in range(max_rounds):
        w, U = np.linalg.eigh(X)
        w = np.maximum(w, 0.0)
        keep = w > rank_tol * max(w.max(), 1e-300)
        r = int(keep.sum())
        if r <= 1:
            v = U[:, -1] * np.sqrt(w[-1])
            j = int(np.argmax(np.abs(v)))
            if np.abs(v[j]) > 0:
                v = v * (np.abs(v[j]) / v[j])
            return v
        V = U[:, keep] * np.sqrt(w[keep])
        vals = np.array([np.trace(Ak @ X).real for Ak in A])
        active = [k for k in range(N) if vals[k] >= 1.0 - active_tol]
        rows = [_vech(V.conj().T @ A[k] @ V) for k in active]
        M = _null_direction(rows, r)
        if M is None:
            raise InputError(
                "no reduction direction found; X is likely not an optimal "
                f"face point (rank {r}, {len(active)} active constraints)")
        reduced = False
        for Ms in (M, -M):
            lmax = float(np.linalg.eigvalsh(Ms).max())
            if lmax <= 1e-12:
                continue
            tau_rank = 1.0 / lmax
            rates = np.array([np.trace((V.conj().T @ A[k] @ V) @ Ms).real
                              for k in range(N)])
            tau_block = np.inf
            for k in range(N):
                if k not in active and rates[k] < -1e-14:
                    tau_block = min(tau_block, (1.0 - vals[k]) / (-rates[k]))
            if tau_rank <= tau_block:
                X = hermitian(V @ (np.eye(r) - tau_rank * Ms) @ V.conj().T)
                reduced = True
                break
        if not reduced:
            # both signs blocked: walk to the blocking point, growing the active set
            Ms = M if np.linalg.eigvalsh(M).max() > 1e-12 else -M
            rates = np.array([np.trace((V.conj().T @ A[k] @ V) @ Ms).real
                              for k in range(N)])
            tau_block = np.inf
            for k in range(N):
                if k not in active and rates[k] < -1e-14:
                    tau_block = min(tau_block, (1.0 - vals[k]) / (-rates[k]))
            if not np.isfinite(tau_block):
                raise InputError("rank reduction stalled without a blocking constraint")
            X = hermitian(V @ (np.eye(r) - tau_block * Ms) @ V.conj().T)
    raise InputError(f"rank reduction did not reach rank one in {max_rounds} rounds")


def grp_extract(X, q: QcqpInstance, samples: int, seed: int) -> np.ndarray:
    """Gaussian random procedure: draw w ~ CN(0, X), rescale each sample to
    the feasible boundary, keep the best objective.

    Samples are generated in fixed-size batches keyed by (seed, batch
    index) through a counter-based generator, so results for a given seed
    are independent of batching/parallel order and growing ``samples``
    only extends the stream (prefix property).
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    X = hermitian(X)
    wv, U = np.linalg.eigh(X)
    wv = np.maximum(wv, 0.0)
    if wv.max() <= 0:
        raise InputError("X is numerically zero; nothing to sample")
    L = U * np.sqrt(wv)
    n = q.n
    best_val = -np.inf
    best_w = None
    done = 0
    batch_idx = 0
    # A_k = c_k J_k + Q: evaluate the shared Q form once per sample and add
    # the per-relay diagonal bump
    Qmat = q.A[0].copy()
    Qmat[0, 0] -= q.scale_coeffs[0]
    while done < samples:
        take = min(GRP_BATCH, samples - done)
        rng = np.random.Generator(
            np.random.Philox(key=[np.uint64(seed), np.uint64(batch_idx)]))
        xi = rng.standard_normal((GRP_BATCH, n)) + 1j * rng.standard_normal((GRP_BATCH, n))
        W = (xi[:take] / np.sqrt(2.0)) @ L.T
        quad_Q = np.einsum("bi,ij,bj->b", W.conj(), Qmat, W).real
        worst = (quad_Q[:, None] + np.abs(W) ** 2 * q.scale_coeffs[None, :]).max(axis=1)
        robj = np.einsum("bi,ij,bj->b", W.conj(), q.R, W).real
        vals = robj / worst
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_w = W[i] / np.sqrt(worst[i])
        done += take
        batch_idx += 1
    return best_w


def _vech(H) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in an orthonormal basis."""
    r = H.shape[0]
    out = [H[i, i].real for i in range(r)]
    rt2 = np.sqrt(2.0)
    for i in range(r):
        for j in range(i + 1, r):
            out.append(rt2 * H[i, j].real)
            out.append(rt2 * H[i, j].imag)
    return np.array(out)


def _unvech(v, r) -> np.ndarray:
    H = np.zeros((r, r), dtype=complex)
    for i in range(r):
        H[i, i] = v[i]
    idx = r
    rt2 = np.sqrt(2.0)
    for i in range(r):
        for j in range(i + 1, r):
            H[i, j] = (v[idx] + 1j * v[idx + 1]) / rt2
            H[j, i] = H[i, j].conjugate()
            idx += 2
    return H


def _null_direction(rows, r):
    """A unit-normalized Hermitian r x r matrix orthogonal to all rows."""
    if rows:
        Arows = np.array(rows)
        _, sv, Vt = np.linalg.svd(Arows, full_matrices=True)
        cut = (sv > 1e-10 * max(1.0, sv.max())).sum()
        null = Vt[cut:]
    else:
        null = np.eye(r * r)
    if null.shape[0] == 0:
        return None
    M = _unvech(null[0], r)
    return M / np.abs(np.linalg.eigvalsh(M)).max()
