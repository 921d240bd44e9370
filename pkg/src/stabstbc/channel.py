"""Block Rayleigh-fading 2x2 MIMO channel and its Pauli decomposition.

The channel matrix ``H`` is held constant over a coherence interval of four
channel uses and redrawn independently for every interval. Signal-to-noise
ratio is defined as ``1 / sigma_n_sq``: every scheme in this package sends unit
power per channel use and ``E|H_ij|^2 = 1``, so each receive antenna sees unit
average signal power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cmat import DimensionError
from .pauli import PAULI_MATRICES
from .stabilizer import ERRORS

__all__ = [
    "SNR_DEFINITION",
    "ChannelRealization",
    "NoiseParams",
    "complex_normal",
    "noise_var_from_snr_db",
    "sample_channel",
    "sample_channels",
    "decompose",
    "reconstruct",
    "pauli_channel",
    "transmit",
    "received_vec",
]

SNR_DEFINITION = "snr = 1/sigma_n^2 (unit transmit power per channel use, E|H_ij|^2 = 1)"

# Pauli letters in coefficient order c0..c3
_BASIS = (PAULI_MATRICES["I"], PAULI_MATRICES["X"], PAULI_MATRICES["Z"], PAULI_MATRICES["Y"])


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with variance ``var``."""
    if isinstance(shape, int):
        shape = (shape,)
    z = rng.standard_normal((*shape, 2)).view(np.complex128)[..., 0]
    z *= math.sqrt(var / 2)
    return z


def noise_var_from_snr_db(snr_db: float) -> float:
    """``sigma_n^2`` for a given SNR in dB; ``+inf`` maps to a noiseless channel."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class NoiseParams:
    sigma_n_sq: float

    def __post_init__(self):
        if not self.sigma_n_sq > 0:
            raise ValueError(f"sigma_n_sq must be positive, got {self.sigma_n_sq}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> NoiseParams:
        return cls(10.0 ** (-snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        return -10.0 * math.log10(self.sigma_n_sq)


def decompose(H) -> np.ndarray:
    """Coefficients ``c`` with ``H = c0 I + c1 X + c2 Z + c3 Y``."""
    H = np.asarray(H, dtype=np.complex128)
    if H.shape[-2:] != (2, 2):
        raise DimensionError(f"expected 2x2 channel, got {H.shape}")
    h11, h12, h21, h22 = H[..., 0, 0], H[..., 0, 1], H[..., 1, 0], H[..., 1, 1]
    return np.stack(
        [(h11 + h22) / 2, (h12 + h21) / 2, (h11 - h22) / 2, 1j * (h12 - h21) / 2],
        axis=-1,
    )


def reconstruct(c) -> np.ndarray:
    """Inverse of :func:`decompose`."""
    c = np.asarray(c, dtype=np.complex128)
    if c.shape[-1] != 4:
        raise DimensionError(f"expected 4 coefficients, got {c.shape}")
    return sum(c[..., k, None, None] * _BASIS[k] for k in range(4))


def pauli_channel(c) -> np.ndarray:
    """The 8x8 vectorized channel ``sum_k c_k E_k`` (equal to ``I (x) I (x) H``)."""
    c = np.asarray(c, dtype=np.complex128).reshape(4)
    return sum(ck * E.to_matrix() for ck, E in zip(c, ERRORS))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    H: np.ndarray
    c: np.ndarray

    @classmethod
    def from_matrix(cls, H) -> ChannelRealization:
        H = np.asarray(H, dtype=np.complex128)
        return cls(H, decompose(H))


def sample_channel(rng: np.random.Generator) -> ChannelRealization:
    """One Rayleigh realization: iid CN(0, 1) entries."""
    return ChannelRealization.from_matrix(complex_normal(rng, (2, 2)))


def sample_channels(rng: np.random.Generator, count: int) -> np.ndarray:
    """``(count, 2, 2)`` independent Rayleigh channel matrices."""
    return complex_normal(rng, (count, 2, 2))


def transmit(T, H, sigma_n_sq: float, rng: np.random.Generator | None = None, noise=None) -> np.ndarray:
    """Received block ``Y = H T + N`` for one coherence interval.

    ``noise`` may be supplied directly (shape of ``H @ T``); otherwise it is
    drawn from ``rng`` with per-entry variance ``sigma_n_sq``.
    """
    T = np.asarray(T, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    if H.shape[-1] != T.shape[-2]:
        raise DimensionError(f"cannot apply channel {H.shape} to block {T.shape}")
    Y = H @ T
    if noise is None:
        if sigma_n_sq == 0:
            return Y
        if rng is None:
            raise ValueError("rng is required to draw noise")
        noise = complex_normal(rng, Y.shape, sigma_n_sq)
    return Y + noise


def received_vec(t, c, n=None) -> np.ndarray:
    """Vectorized receive path ``y = sum_k c_k E_k t + n``."""
    y = pauli_channel(c) @ np.asarray(t, dtype=np.complex128).reshape(8)
    if n is not None:
        y = y + np.asarray(n, dtype=np.complex128).reshape(8)
    return y
