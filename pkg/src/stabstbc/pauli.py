"""Exact arithmetic in the n-qubit Pauli group.

A :class:`PauliOp` stores symplectic bits ``(x_i, z_i)`` per qubit and a phase
exponent ``e`` so that the operator is ``j**e`` times a tensor product of the
letters I=(0,0), X=(1,0), Z=(0,1), Y=(1,1). Dense matrices are only built on
request, so phases never drift.

>>> str(PauliOp.parse("X") * PauliOp.parse("Z"))
'-jY'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .cmat import DimensionError

__all__ = ["PauliOp", "PAULI_MATRICES", "commutes", "commutes_dense", "signature"]

PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_TEXT = {0: "", 1: "j", 2: "-", 3: "-j"}
_PHASE_VALUE = {0: 1, 1: 1j, 2: -1, 3: -1j}
_PARSE_RE = re.compile(r"^\s*([+-]?)\s*([ij]?)\s*([IXYZ]+)\s*$")


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of j picked up when multiplying single-qubit letters (x1,z1)(x2,z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliOp:
    """An element ``j**phase * P_1 (x) ... (x) P_n`` of the Pauli group."""

    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise DimensionError("x and z bit strings differ in length")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> PauliOp:
        bits = [_LETTER_BITS[c] for c in letters]
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits), phase)

    @classmethod
    def parse(cls, text: str) -> PauliOp:
        """Parse notation such as ``"XZX"``, ``"-jYII"`` or ``"+iZ"``."""
        m = _PARSE_RE.match(text)
        if m is None:
            raise ValueError(f"not a Pauli string: {text!r}")
        sign, imag, letters = m.groups()
        phase = (2 if sign == "-" else 0) + (1 if imag else 0)
        return cls.from_letters(letters, phase)

    @classmethod
    def identity(cls, n: int) -> PauliOp:
        return cls((0,) * n, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def letters(self) -> str:
        return "".join(_BITS_LETTER[b] for b in zip(self.x, self.z))

    @property
    def phase_value(self) -> complex:
        return _PHASE_VALUE[self.phase]

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def __repr__(self) -> str:
        return f"PauliOp({str(self)!r})"

    def to_matrix(self) -> np.ndarray:
        mats = [PAULI_MATRICES[c] for c in self.letters]
        return self.phase_value * reduce(np.kron, mats)

    def _check_n(self, other: PauliOp) -> None:
        if self.n != other.n:
            raise DimensionError(f"qubit counts differ: {self.n} vs {other.n}")

    def multiply(self, other: PauliOp) -> PauliOp:
        self._check_n(other)
        e = self.phase + other.phase
        e += sum(_g(a, b, c, d) for a, b, c, d in zip(self.x, self.z, other.x, other.z))
        x = tuple(a ^ c for a, c in zip(self.x, other.x))
        z = tuple(b ^ d for b, d in zip(self.z, other.z))
        return PauliOp(x, z, e)

    __mul__ = multiply

    def inverse(self) -> PauliOp:
        # letters are involutions, so only the phase needs inverting
        return PauliOp(self.x, self.z, -self.phase)

    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def commutes(self, other: PauliOp) -> bool:
        self._check_n(other)
        s = sum(a * d + b * c for a, b, c, d in zip(self.x, self.z, other.x, other.z))
        return s % 2 == 0


def commutes(a: PauliOp, b: PauliOp) -> bool:
    """True iff ``a`` and ``b`` commute, from the symplectic inner product."""
    return a.commutes(b)


def commutes_dense(a: PauliOp, b: PauliOp, atol: float = 1e-12) -> bool:
    """Matrix-level commutation test, an independent check on :func:`commutes`."""
    A, B = a.to_matrix(), b.to_matrix()
    return bool(np.allclose(A @ B, B @ A, atol=atol))


def signature(e: PauliOp, generators) -> tuple[int, ...]:
    """Syndrome bits of ``e``: 0 where it commutes with a generator, 1 otherwise."""
    return tuple(0 if e.commutes(g) else 1 for g in generators)
