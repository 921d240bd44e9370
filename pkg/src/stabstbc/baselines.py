"""Comparison schemes over the same 2x2, four-use coherence interval.

* Pilot-aided Alamouti: uses 1-2 carry the pilot matrix, the receiver solves
  for a channel estimate and then treats it as exact while combining the
  Alamouti block sent on uses 3-4. BPSK gives rate 1/2, QPSK rate 1.
* Differential unitary group codes: uses 1-2 carry a reference matrix, uses
  3-4 carry the reference times a unitary codeword. Detection uses only the
  two received blocks. The Pauli letters give rate 1/2, an order-16 dicyclic
  group rate 1.

Every scheme sends unit power per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import complex_normal
from .pauli import PAULI_MATRICES

__all__ = [
    "PILOT",
    "REFERENCE",
    "AlamoutiScheme",
    "DifferentialScheme",
    "build_dicyclic_16",
    "pauli_codebook",
    "alamouti_block",
    "alamouti_combine",
    "alamouti_run_interval",
    "differential_decode",
    "differential_run_interval",
    "bits_to_indices",
    "indices_to_bits",
]

PILOT = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
REFERENCE = np.eye(2, dtype=np.complex128)


def bits_to_indices(bits: np.ndarray) -> np.ndarray:
    """Rows of bits (MSB first) to integers."""
    bits = np.asarray(bits, dtype=np.int64)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


def indices_to_bits(idx: np.ndarray, nbits: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    shifts = np.arange(nbits - 1, -1, -1)
    return ((idx[..., None] >> shifts) & 1).astype(np.uint8)


# -- Alamouti --------------------------------------------------------------------


def _modulate(bits: np.ndarray) -> np.ndarray:
    """``(B, 2)`` bits -> BPSK pairs, ``(B, 4)`` bits -> Gray QPSK pairs."""
    bits = np.asarray(bits)
    if bits.shape[-1] == 2:
        return (1.0 - 2.0 * bits).astype(np.complex128)
    if bits.shape[-1] == 4:
        b = 1.0 - 2.0 * bits
        return (b[..., 0::2] + 1j * b[..., 1::2]) / math.sqrt(2)
    raise ValueError(f"Alamouti needs 2 (BPSK) or 4 (QPSK) bits, got {bits.shape[-1]}")


def _slice(x: np.ndarray, nbits: int) -> np.ndarray:
    if nbits == 2:
        return (x.real < 0).astype(np.uint8)
    out = np.empty((*x.shape[:-1], 4), dtype=np.uint8)
    out[..., 0::2] = x.real < 0
    out[..., 1::2] = x.imag < 0
    return out


def alamouti_block(x: np.ndarray) -> np.ndarray:
    """``(B, 2)`` symbols -> ``(B, 2, 2)`` blocks ``[[x1, -x2*], [x2, x1*]] / sqrt 2``."""
    x1, x2 = x[..., 0], x[..., 1]
    row0 = np.stack([x1, -np.conj(x2)], axis=-1)
    row1 = np.stack([x2, np.conj(x1)], axis=-1)
    return np.stack([row0, row1], axis=-2) / math.sqrt(2)


def alamouti_combine(Yd: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Linear Alamouti combining with channel ``H`` (taken as exact); returns ``(B, 2)``."""
    h1, h2 = H[..., :, 0], H[..., :, 1]
    y3, y4c = Yd[..., :, 0], np.conj(Yd[..., :, 1])
    x1 = np.sum(np.conj(h1) * y3 + h2 * y4c, axis=-1)
    x2 = np.sum(np.conj(h2) * y3 - h1 * y4c, axis=-1)
    return np.stack([x1, x2], axis=-1)


@dataclass(frozen=True)
class AlamoutiScheme:
    rate: float
    perfect_csi: bool = False

    def __post_init__(self):
        if self.rate not in (0.5, 1.0):
            raise ValueError(f"Alamouti rate must be 1/2 or 1, got {self.rate}")

    @property
    def bits_per_interval(self) -> int:
        return 2 if self.rate == 0.5 else 4

    def metadata(self) -> dict:
        return {
            "family": "alamouti",
            "rate": self.rate,
            "bits_per_interval": self.bits_per_interval,
            "modulation": "BPSK" if self.rate == 0.5 else "QPSK (Gray)",
            "csi": "perfect" if self.perfect_csi else "pilot estimate (treated as exact)",
            "pilot": [[complex(v).real for v in row] for row in PILOT],
        }

    def run(self, bits: np.ndarray, H: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Batched interval: ``bits (B, nb)``, ``H (B, 2, 2)``, ``noise (B, 2, 4)``."""
        x = _modulate(bits)
        Yp = H @ PILOT + noise[..., :2]
        Yd = H @ alamouti_block(x) + noise[..., 2:]
        H_use = H if self.perfect_csi else Yp @ PILOT.conj().T
        return _slice(alamouti_combine(Yd, H_use), bits.shape[-1])

    def simulate(self, rng: np.random.Generator, n: int, sigma_n_sq: float) -> int:
        bits = rng.integers(0, 2, size=(n, self.bits_per_interval), dtype=np.uint8)
        H = complex_normal(rng, (n, 2, 2))
        noise = complex_normal(rng, (n, 2, 4), sigma_n_sq) if sigma_n_sq > 0 else np.zeros((n, 2, 4), complex)
        return int(np.count_nonzero(self.run(bits, H, noise) != bits))


def alamouti_run_interval(bits, H, sigma_n_sq: float, rng: np.random.Generator | None = None, perfect_csi: bool = False) -> np.ndarray:
    """One coherence interval of pilot-aided Alamouti; returns the decoded bits."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
    if bits.shape[1] not in (2, 4):
        raise ValueError(f"Alamouti needs 2 (BPSK) or 4 (QPSK) bits, got {bits.shape[1]}")
    scheme = AlamoutiScheme(0.5 if bits.shape[1] == 2 else 1.0, perfect_csi)
    if sigma_n_sq > 0:
        noise = complex_normal(rng, (1, 2, 4), sigma_n_sq)
    else:
        noise = np.zeros((1, 2, 4), dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128).reshape(1, 2, 2)
    return scheme.run(bits, H, noise)[0]


# -- differential ------------------------------------------------------------------


def pauli_codebook() -> np.ndarray:
    return np.array([PAULI_MATRICES[c] for c in "IXZY"])


def build_dicyclic_16() -> np.ndarray:
    """Order-16 dicyclic group ``{a^k, a^k b}`` with ``a = diag(w, w*)``, ``w = e^{j pi/4}``."""
    w = np.exp(1j * np.pi / 4)
    a = np.diag([w, np.conj(w)])
    b = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
    powers = [np.linalg.matrix_power(a, k) for k in range(8)]
    return np.array(powers + [p @ b for p in powers])


def differential_decode(Y1: np.ndarray, Y2: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """``argmin_V ||Y2 - Y1 V||_F`` per trial; ``Y1, Y2`` are ``(B, 2, 2)``."""
    D = Y2[:, None] - Y1[:, None] @ codebook[None]
    dist = np.sum(D.real**2 + D.imag**2, axis=(-2, -1))
    return np.argmin(dist, axis=1)


@dataclass(frozen=True)
class DifferentialScheme:
    rate: float
    codebook: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.rate not in (0.5, 1.0):
            raise ValueError(f"differential rate must be 1/2 or 1, got {self.rate}")
        cb = pauli_codebook() if self.rate == 0.5 else build_dicyclic_16()
        object.__setattr__(self, "codebook", cb)

    @property
    def bits_per_interval(self) -> int:
        return 2 if self.rate == 0.5 else 4

    def metadata(self) -> dict:
        return {
            "family": "differential",
            "rate": self.rate,
            "bits_per_interval": self.bits_per_interval,
            "codebook": "Pauli {I,X,Z,Y}" if self.rate == 0.5 else "dicyclic-16: a=diag(e^{j pi/4}, e^{-j pi/4}), b=[[0,1],[-1,0]]",
            "reference": "I_2",
            "detector": "argmin_V ||Y2 - Y1 V||_F",
        }

    def run(self, idx: np.ndarray, H: np.ndarray, noise: np.ndarray) -> np.ndarray:
        V = self.codebook[idx]
        Y1 = H @ REFERENCE + noise[..., :2]
        Y2 = H @ REFERENCE @ V + noise[..., 2:]
        return differential_decode(Y1, Y2, self.codebook)

    def simulate(self, rng: np.random.Generator, n: int, sigma_n_sq: float) -> int:
        idx = rng.integers(0, len(self.codebook), size=n)
        H = complex_normal(rng, (n, 2, 2))
        noise = complex_normal(rng, (n, 2, 4), sigma_n_sq) if sigma_n_sq > 0 else np.zeros((n, 2, 4), complex)
        dec = self.run(idx, H, noise)
        return int(np.sum(np.bitwise_count(idx ^ dec)))


def differential_run_interval(bits, H, sigma_n_sq: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """One coherence interval of differential group coding; returns the decoded bits."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size not in (2, 4):
        raise ValueError(f"differential needs 2 or 4 bits, got {bits.size}")
    scheme = DifferentialScheme(0.5 if bits.size == 2 else 1.0)
    if sigma_n_sq > 0:
        noise = complex_normal(rng, (1, 2, 4), sigma_n_sq)
    else:
        noise = np.zeros((1, 2, 4), dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128).reshape(1, 2, 2)
    dec = scheme.run(np.array([bits_to_indices(bits)]), H, noise)
    return indices_to_bits(dec, bits.size)[0]
