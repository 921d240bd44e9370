"""Qubit symbol alphabets: Grassmannian line packings in C^2.

A constellation is a set of N unit vectors in C^2, each carrying log2(N) bits
with natural-binary labels. Quality is measured by the coherence
``max_{i != j} |s_i* s_j|``; the noncoherent decoder's worst pairwise margin is
``4 (1 - coherence**2)``, so good alphabets minimize coherence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "ConstellationError",
    "Constellation",
    "coherence",
    "welch_bound",
    "pairing_criterion",
    "pairing_criterion_closed_form",
    "optimize_packing",
    "embedded",
    "EMBEDDED_NAMES",
    "load_constellation",
    "save_constellation",
    "canonical_phase",
    "index_to_bits",
    "bits_to_index",
]

EMBEDDED_NAMES = ("gr4", "gr8")
# seeds used to produce the shipped packings with optimize_packing
EMBEDDED_SEEDS = {"gr4": 4, "gr8": 8}

_NORM_TOL = 1e-9


class ConstellationError(ValueError):
    """Invalid constellation, bit labeling, or constellation file."""


def _points(c) -> np.ndarray:
    pts = c.points if isinstance(c, Constellation) else c
    pts = np.asarray(pts, dtype=np.complex128)
    if pts.ndim != 2:
        raise ConstellationError(f"points must be an (N, d) array, got {pts.shape}")
    return pts


def coherence(c) -> float:
    """Largest pairwise ``|s_i* s_j|`` over distinct indices."""
    pts = _points(c)
    if len(pts) < 2:
        raise ConstellationError("coherence needs at least two points")
    G = np.abs(pts.conj() @ pts.T)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def welch_bound(N: int, d: int = 2) -> float:
    """Lower bound on the coherence of any N unit vectors in C^d."""
    if N <= d:
        return 0.0
    return math.sqrt((N - d) / (d * (N - 1)))


def pairing_criterion(c, sigma_n_sq: float = 0.0) -> float:
    """Smallest expected decision margin ``s* B s - t* B t`` over ordered pairs.

    ``B = 4 s s* + 2 sigma_n_sq I`` is the conditional mean of the decoder's
    summed outer product when ``s`` was sent.
    """
    pts = _points(c)
    d = pts.shape[1]
    best = math.inf
    for i, s in enumerate(pts):
        B = 4 * np.outer(s, s.conj()) + 2 * sigma_n_sq * np.eye(d)
        for j, t in enumerate(pts):
            if i == j:
                continue
            r = np.vdot(s, B @ s).real - np.vdot(t, B @ t).real
            best = min(best, r)
    return float(best)


def pairing_criterion_closed_form(c) -> float:
    return 4.0 * (1.0 - coherence(c) ** 2)


def canonical_phase(points: np.ndarray) -> np.ndarray:
    """Rotate each point so its first nonzero entry is real and positive."""
    pts = np.array(points, dtype=np.complex128)
    for p in pts:
        k = int(np.argmax(np.abs(p) > 1e-12))
        p *= np.exp(-1j * np.angle(p[k]))
        p[k] = abs(p[k])
    return pts


def index_to_bits(index: int, nbits: int) -> np.ndarray:
    """Natural-binary label of ``index``, most significant bit first."""
    if not 0 <= index < 2**nbits:
        raise ConstellationError(f"index {index} out of range for {nbits} bits")
    return np.array([(index >> (nbits - 1 - b)) & 1 for b in range(nbits)], dtype=np.uint8)


def bits_to_index(bits, nbits: int | None = None) -> int:
    bits = [int(b) for b in bits]
    if nbits is not None and len(bits) != nbits:
        raise ConstellationError(f"expected {nbits} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ConstellationError(f"bits must be 0/1, got {bits}")
    index = 0
    for b in bits:
        index = index << 1 | b
    return index


@dataclass(frozen=True, eq=False)
class Constellation:
    points: np.ndarray
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = _points(self.points).copy()
        N = len(pts)
        if N < 2 or N & (N - 1):
            raise ConstellationError(f"size must be a power of two >= 2, got {N}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1) > _NORM_TOL):
            raise ConstellationError(f"points must have unit norm, got norms {norms}")
        if coherence(pts) >= 1 - 1e-12:
            raise ConstellationError("constellation contains colinear points")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def label_bits(self) -> int:
        return len(self).bit_length() - 1

    @property
    def coherence(self) -> float:
        return coherence(self.points)

    def bits_to_symbol(self, bits) -> np.ndarray:
        return self.points[bits_to_index(bits, self.label_bits)]

    def symbol_to_bits(self, index: int) -> np.ndarray:
        return index_to_bits(index, self.label_bits)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "N": len(self),
            "coherence": self.coherence,
            "welch_bound": welch_bound(len(self), self.dim),
            "labeling": "natural-binary",
        }


# -- packing optimizer ------------------------------------------------------


def _unpack(x: np.ndarray, N: int, d: int) -> np.ndarray:
    return (x[: N * d] + 1j * x[N * d :]).reshape(N, d)


def _pack(pts: np.ndarray) -> np.ndarray:
    flat = pts.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def _normalize(pts: np.ndarray) -> np.ndarray:
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _soft_stage(pts: np.ndarray, p: float) -> np.ndarray:
    # minimize sum_{i<j} |<s_i,s_j>|^(2p) over normalized points
    N, d = pts.shape
    iu = np.triu_indices(N, 1)

    def objective(x):
        raw = _unpack(x, N, d)
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        u = raw / norms
        G = u.conj() @ u.T
        A = np.abs(G) ** 2
        mask = np.zeros_like(A)
        mask[iu] = 1.0
        f = np.sum(mask * A**p)
        # d f / d conj(u_i) = sum_j p A_ij^(p-1) conj(G_ij) u_j  (both orderings of the pair)
        W = mask + mask.T
        coef = W * p * A ** (p - 1) * G.conj()
        gu = coef @ u
        # chain rule through the normalization u = raw / |raw|
        radial = np.sum((u.conj() * gu).real, axis=1, keepdims=True)
        graw = (gu - radial * u) / norms
        return f, _pack(2 * graw)

    res = minimize(objective, _pack(pts), jac=True, method="L-BFGS-B", options={"maxiter": 2000})
    return _normalize(_unpack(res.x, N, d))


def _minimax_polish(pts: np.ndarray, iters: int) -> np.ndarray:
    # epigraph form: minimize t subject to |<s_i,s_j>|^2 <= t and |s_i|^2 = 1
    N, d = pts.shape
    iu, ju = np.triu_indices(N, 1)
    t0 = coherence(pts) ** 2

    def unpack(z):
        return _unpack(z[:-1], N, d)

    def ineq(z):
        u = unpack(z)
        G = np.abs(u.conj() @ u.T) ** 2
        return z[-1] - G[iu, ju]

    def ineq_jac(z):
        u = unpack(z)
        G = u.conj() @ u.T
        J = np.zeros((len(iu), 2 * N * d + 1))
        J[:, -1] = 1.0
        for row, (i, j) in enumerate(zip(iu, ju)):
            # |g|^2 with g = <u_i, u_j>; d/d conj(u_i) = conj(g) u_j, d/d conj(u_j) = g u_i
            gi = np.conj(G[i, j]) * u[j]
            gj = G[i, j] * u[i]
            for k, grad in ((i, gi), (j, gj)):
                J[row, k * d : (k + 1) * d] -= 2 * grad.real
                J[row, N * d + k * d : N * d + (k + 1) * d] -= 2 * grad.imag
        return J

    def eq(z):
        u = unpack(z)
        return np.sum(np.abs(u) ** 2, axis=1) - 1.0

    def eq_jac(z):
        u = unpack(z)
        J = np.zeros((N, 2 * N * d + 1))
        for k in range(N):
            J[k, k * d : (k + 1) * d] = 2 * u[k].real
            J[k, N * d + k * d : N * d + (k + 1) * d] = 2 * u[k].imag
        return J

    z0 = np.concatenate([_pack(pts), [t0]])
    grad = np.zeros_like(z0)
    grad[-1] = 1.0
    res = minimize(
        lambda z: z[-1],
        z0,
        jac=lambda z: grad,
        method="SLSQP",
        constraints=[
            {"type": "ineq", "fun": ineq, "jac": ineq_jac},
            {"type": "eq", "fun": eq, "jac": eq_jac},
        ],
        options={"maxiter": iters, "ftol": 1e-15},
    )
    polished = _normalize(unpack(res.x))
    return polished if coherence(polished) <= coherence(pts) else pts


def optimize_packing(
    N: int,
    d: int = 2,
    rng: np.random.Generator | None = None,
    iters: int = 500,
    restarts: int = 8,
    name: str | None = None,
) -> Constellation:
    """Search for N lines in C^d with small coherence.

    Each restart takes a random start, runs a smooth p-norm relaxation and
    then polishes the exact minimax problem with SLSQP. The best restart is
    returned; it is never worse than its own random start.
    """
    if N < 2:
        raise ConstellationError("need at least two points")
    rng = np.random.default_rng() if rng is None else rng
    best = None
    for _ in range(restarts):
        start = _normalize(rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d)))
        pts = start
        for p in (4.0, 16.0):
            cand = _soft_stage(pts, p)
            if coherence(cand) < coherence(pts):
                pts = cand
        pts = _minimax_polish(pts, iters)
        if best is None or coherence(pts) < coherence(best):
            best = pts
    best = canonical_phase(best)
    coh = coherence(best)
    assert coh >= welch_bound(N, d) - 1e-9
    return Constellation(best, name=name or f"opt{N}", meta={"coherence": coh})


# -- files -------------------------------------------------------------------


def save_constellation(c: Constellation, path) -> None:
    lines = [f"# N={len(c)} d={c.dim} coherence={c.coherence:.17g}"]
    for p in c.points:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in p))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_constellation(text: str, name: str) -> Constellation:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ConstellationError(f"{name}: missing '# N=... d=2 coherence=...' header")
    header = {}
    for tok in lines[0].lstrip("#").split():
        key, _, val = tok.partition("=")
        header[key] = val
    try:
        N, d, coh = int(header["N"]), int(header["d"]), float(header["coherence"])
    except (KeyError, ValueError) as exc:
        raise ConstellationError(f"{name}: bad header {lines[0]!r}") from exc
    if d != 2:
        raise ConstellationError(f"{name}: only d=2 is supported")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            row = [complex(*map(float, tok.split(","))) for tok in ln.split()]
        except (TypeError, ValueError) as exc:
            raise ConstellationError(f"{name}:{lineno}: cannot parse {ln!r}") from exc
        if len(row) != d:
            raise ConstellationError(f"{name}:{lineno}: expected {d} entries, got {len(row)}")
        rows.append(row)
    if len(rows) != N:
        raise ConstellationError(f"{name}: header says N={N} but file has {len(rows)} points")
    c = Constellation(np.array(rows), name=name, meta={"coherence": coh})
    if abs(c.coherence - coh) > 1e-9:
        raise ConstellationError(f"{name}: header coherence {coh} != computed {c.coherence}")
    return c


def load_constellation(path, name: str | None = None) -> Constellation:
    path = Path(path)
    return _parse_constellation(path.read_text(), name or path.stem)


def embedded(name: str) -> Constellation:
    """Shipped packing ``"gr4"`` or ``"gr8"``."""
    if name not in EMBEDDED_NAMES:
        raise KeyError(f"unknown constellation {name!r}; choose from {EMBEDDED_NAMES}")
    text = resources.files("stabstbc").joinpath("data", f"{name}.txt").read_text()
    return _parse_constellation(text, name)
