"""Noncoherent maximum-likelihood receiver for the stabilizer space-time code.

Pipeline for one received vector ``y = vec(Y)``:

1. project onto the code space and the three error subspaces (``P_k y``),
2. undo each error with ``E_k`` (``z_k = E_k P_k y``),
3. reduce to two dimensions, ``q_k = C* z_k / (2 sqrt 2) = sqrt(2) c_k s + n_k``,
4. pick the constellation point maximizing ``s* (sum_k q_k q_k*) s``.

Two slower oracles check the production rule: :func:`bruteforce_ml` evaluates
the Gaussian likelihood of ``q`` with the noise-dependent inverse covariance,
and :func:`marginal_ml` evaluates the likelihood of the full 8-dim ``y`` with
the channel integrated out. :func:`fidelity_decide` reaches the same decision
through the quantum fidelity against a mixed state built from the ``q_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation
from .stabilizer import StabilizerCode, encode_matrix

__all__ = [
    "ConfigurationError",
    "DegenerateInputError",
    "SufficientStats",
    "DecisionDiagnostics",
    "project",
    "correct_and_reduce",
    "reduce",
    "ml_decide",
    "u_s_explicit",
    "q_covariance",
    "q_log_likelihood",
    "bruteforce_ml",
    "marginal_ml",
    "mixed_state",
    "fidelity",
    "fidelity_decide",
    "reduce_batch",
    "ml_decide_batch",
    "dump_diagnostics",
]


class ConfigurationError(ValueError):
    """Decoder called with an unusable constellation."""


class DegenerateInputError(ValueError):
    """All sufficient statistics are zero; no state can be formed."""


@dataclass(frozen=True, eq=False)
class SufficientStats:
    q: np.ndarray  # (4, 2)
    z: np.ndarray | None = None  # (4, 8), kept for diagnostics

    @property
    def outer_sum(self) -> np.ndarray:
        return np.einsum("ki,kj->ij", self.q, self.q.conj())


@dataclass(frozen=True, eq=False)
class DecisionDiagnostics:
    scores: np.ndarray
    index: int
    fidelity: float
    degenerate: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "scores": [float(s) for s in self.scores],
                "index": self.index,
                "fidelity": self.fidelity,
                "degenerate": self.degenerate,
            }
        )


def _points(C) -> np.ndarray:
    pts = C.points if isinstance(C, Constellation) else np.asarray(C, dtype=np.complex128)
    if pts.size == 0:
        raise ConfigurationError("empty constellation")
    return pts


def project(y, code: StabilizerCode) -> list[np.ndarray]:
    """``[P_0 y, P_1 y, P_2 y, P_3 y]``; the four pieces sum to ``y``."""
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    return [P @ y for P in code.projectors]


def correct_and_reduce(projections, code: StabilizerCode, keep_z: bool = False) -> SufficientStats:
    z = np.array([E @ p for E, p in zip(code.error_matrices, projections)])
    q = z @ code.basis.conj() / (2 * math.sqrt(2))
    return SufficientStats(q, z if keep_z else None)


def reduce(y, code: StabilizerCode, keep_z: bool = False) -> SufficientStats:
    return correct_and_reduce(project(y, code), code, keep_z)


def ml_decide(stats: SufficientStats, C, sigma_n_sq: float | None = None) -> tuple[int, DecisionDiagnostics]:
    """ML decision from the reduced statistics.

    ``sigma_n_sq`` is accepted for interface symmetry with the oracles; the
    rule does not depend on it. Ties go to the lowest index.
    """
    pts = _points(C)
    proj = stats.q @ pts.conj().T  # (4, N): s_n* q_k
    scores = np.sum(proj.real**2 + proj.imag**2, axis=0)
    idx = int(np.argmax(scores))
    total = float(np.sum(np.abs(stats.q) ** 2))
    degenerate = total == 0.0
    fid = 0.0 if degenerate else math.sqrt(scores[idx] / total)
    return idx, DecisionDiagnostics(scores, idx, fid, degenerate)


# -- likelihood oracles ----------------------------------------------------------


def u_s_explicit(s, sigma_n_sq: float) -> np.ndarray:
    """Closed-form ``(s s* + sigma^2/2 I)^{-1}`` for a unit vector ``s``."""
    s1, s2 = np.asarray(s, dtype=np.complex128).reshape(2)
    h = sigma_n_sq / 2
    M = np.array(
        [
            [abs(s2) ** 2 + h, -s1 * np.conj(s2)],
            [-s2 * np.conj(s1), abs(s1) ** 2 + h],
        ]
    )
    return M / (h * (1 + h))


def q_covariance(s, sigma_n_sq: float) -> np.ndarray:
    """Covariance of the stacked statistic given ``s``: ``I_4 (x) (s s* + sigma^2/2 I)``."""
    s = np.asarray(s, dtype=np.complex128).reshape(2)
    return np.kron(np.eye(4), np.outer(s, s.conj()) + sigma_n_sq / 2 * np.eye(2))


def q_log_likelihood(q, s, sigma_n_sq: float) -> float:
    """``log f(q | s)`` for the circular Gaussian model of the stacked statistic."""
    q = np.asarray(q, dtype=np.complex128).reshape(8)
    U = u_s_explicit(s, sigma_n_sq)
    quad = np.vdot(q, np.kron(np.eye(4), U) @ q).real
    s = np.asarray(s, dtype=np.complex128).reshape(2)
    det2 = np.linalg.det(np.outer(s, s.conj()) + sigma_n_sq / 2 * np.eye(2)).real
    return float(-quad - 4 * math.log(det2) - 8 * math.log(math.pi))


def bruteforce_ml(y, code: StabilizerCode, C, sigma_n_sq: float) -> int:
    """Argmax of the likelihood of ``q`` over the constellation (oracle path)."""
    if not sigma_n_sq > 0:
        raise ValueError("likelihood oracle needs sigma_n_sq > 0 (covariance is singular)")
    pts = _points(C)
    q = reduce(y, code).q
    ll = [q_log_likelihood(q, s, sigma_n_sq) for s in pts]
    return int(np.argmax(ll))


def marginal_ml(y, C, sigma_n_sq: float) -> int:
    """Argmax of ``log f(y | s)`` on the full received vector, channel marginalized.

    ``vec(H T) = (T^T (x) I_2) vec(H)`` with ``vec(H) ~ CN(0, I_4)``, so
    ``y | s ~ CN(0, (T^T (x) I_2)(T^T (x) I_2)* + sigma^2 I_8)``.
    """
    if not sigma_n_sq > 0:
        raise ValueError("likelihood oracle needs sigma_n_sq > 0")
    pts = _points(C)
    y = np.asarray(y, dtype=np.complex128).reshape(8)
    ll = []
    for s in pts:
        A = np.kron(encode_matrix(s).T, np.eye(2))
        K = A @ A.conj().T + sigma_n_sq * np.eye(8)
        _, logdet = np.linalg.slogdet(K)
        ll.append(-np.vdot(y, np.linalg.solve(K, y)).real - logdet)
    return int(np.argmax(ll))


# -- fidelity form -------------------------------------------------------------


def mixed_state(stats: SufficientStats) -> np.ndarray:
    """Density matrix mixing the normalized ``q_k`` with weights ``|q_k|^2 / sum |q_i|^2``."""
    weights = np.sum(np.abs(stats.q) ** 2, axis=1)
    total = weights.sum()
    if total == 0:
        raise DegenerateInputError("all sufficient statistics are zero")
    rho = np.zeros((2, 2), dtype=np.complex128)
    for w, qk in zip(weights, stats.q):
        if w > 0:
            qhat = qk / math.sqrt(w)
            rho += (w / total) * np.outer(qhat, qhat.conj())
    return rho


def _psd_sqrt(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    r = _psd_sqrt(rho)
    return float(np.trace(_psd_sqrt(r @ sigma @ r)).real)


def fidelity_decide(stats: SufficientStats, C) -> int:
    pts = _points(C)
    rho = mixed_state(stats)
    f = [fidelity(rho, np.outer(s, s.conj())) for s in pts]
    return int(np.argmax(f))


# -- batched production path ----------------------------------------------------


def reduce_batch(y: np.ndarray, code: StabilizerCode) -> np.ndarray:
    """``(B, 8)`` received vectors to ``(B, 4, 2)`` reduced statistics."""
    return (y @ code.reduction_matrix.T).reshape(-1, 4, 2)


def ml_decide_batch(q: np.ndarray, points: np.ndarray) -> np.ndarray:
    B, K, d = q.shape
    proj = (q.reshape(B * K, d) @ points.conj().T).view(np.float64)  # (B*K, 2N) re/im pairs
    scores = np.einsum("bkn,bkn->bn", proj.reshape(B, K, -1), proj.reshape(B, K, -1))
    scores = scores.reshape(B, -1, 2).sum(axis=2)
    return np.argmax(scores, axis=1)


def dump_diagnostics(fp, trial: int, diag: DecisionDiagnostics) -> None:
    """Append one JSON line for ``trial`` to the open text file ``fp``."""
    record = json.loads(diag.to_json())
    record["trial"] = trial
    fp.write(json.dumps(record) + "\n")
