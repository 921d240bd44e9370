"""The three-qubit stabilizer code used as a 2x2 space-time block code.

The vectorized 2x4 codeword lives in C^8 = (C^2)^{(x)3}. The channel acts on it
as ``I (x) I (x) H``, i.e. as a combination of the four errors ``IIx`` with
``x`` in {I, X, Z, Y}. Two commuting generators give each of those errors its
own syndrome, so the receiver can separate the four channel components by
projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .cmat import unvec_2x4
from .pauli import PauliOp, signature

__all__ = [
    "InvalidStabilizerError",
    "NormalizationError",
    "StabilizerCode",
    "GENERATORS",
    "ERRORS",
    "BASIS",
    "build_code",
    "projector",
    "eigenspace_basis",
    "validate_code",
    "encode",
    "encode_matrix",
    "encode_batch",
]


class InvalidStabilizerError(ValueError):
    """Generators do not define a stabilizer group (or cannot correct the errors)."""


class NormalizationError(ValueError):
    """Symbol vector does not have unit norm."""


GENERATORS = (PauliOp.parse("XZX"), PauliOp.parse("XXZ"))
ERRORS = tuple(PauliOp.parse(s) for s in ("III", "IIX", "IIZ", "IIY"))

# Columns are kept at norm 2 so that a unit symbol gives a codeword of energy 4.
BASIS = np.array(
    [
        [1, 0, 0, -1, 0, 1, 1, 0],
        [0, -1, -1, 0, -1, 0, 0, 1],
    ],
    dtype=np.complex128,
).T


def projector(generators, syndrome) -> np.ndarray:
    """Projector onto the joint eigenspace with eigenvalue ``(-1)**bit`` per generator."""
    dim = 2 ** generators[0].n
    P = np.eye(dim, dtype=np.complex128)
    for g, bit in zip(generators, syndrome):
        sign = -1.0 if bit else 1.0
        P = P @ (np.eye(dim) + sign * g.to_matrix()) / 2
    return P


def _check_stabilizer(generators) -> None:
    gens = list(generators)
    if not gens:
        raise InvalidStabilizerError("no generators given")
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise InvalidStabilizerError("generators act on different qubit counts")
    for a, b in combinations(gens, 2):
        if not a.commutes(b):
            raise InvalidStabilizerError(f"{a} and {b} anticommute")
    # the group is abelian, so its elements are the subset products
    identity = PauliOp.identity(n)
    minus_identity = PauliOp(identity.x, identity.z, 2)
    for mask in range(1, 2 ** len(gens)):
        elem = identity
        for i, g in enumerate(gens):
            if mask >> i & 1:
                elem = elem * g
        if elem == minus_identity:
            raise InvalidStabilizerError("generated group contains -I")
        if elem == identity:
            raise InvalidStabilizerError("generators are not independent")
        if not elem.is_hermitian():
            raise InvalidStabilizerError(f"group element {elem} is not Hermitian")


def eigenspace_basis(generators, atol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the joint +1 eigenspace of ``generators``.

    Serves as an independent check on the hard-coded :data:`BASIS`.
    """
    _check_stabilizer(generators)
    P0 = projector(generators, (0,) * len(generators))
    w, V = np.linalg.eigh(P0)
    return V[:, w > 1 - atol]


def validate_code(generators, errors) -> None:
    """Raise unless ``generators`` form a stabilizer that tells ``errors`` apart."""
    _check_stabilizer(generators)
    sigs = [signature(e, generators) for e in errors]
    if len(set(sigs)) != len(sigs):
        raise InvalidStabilizerError(f"errors share syndromes: {sigs}")


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    generators: tuple[PauliOp, ...]
    errors: tuple[PauliOp, ...]
    basis: np.ndarray
    projectors: tuple[np.ndarray, ...]

    @cached_property
    def error_matrices(self) -> tuple[np.ndarray, ...]:
        return tuple(e.to_matrix() for e in self.errors)

    @cached_property
    def syndromes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(signature(e, self.generators) for e in self.errors)

    @cached_property
    def reduction_matrix(self) -> np.ndarray:
        """8x8 map ``y -> [q_0; q_1; q_2; q_3]`` with ``q_k = C* E_k P_k y / (2 sqrt 2)``."""
        Ch = self.basis.conj().T
        blocks = [Ch @ E @ P for E, P in zip(self.error_matrices, self.projectors)]
        return np.vstack(blocks) / (2 * np.sqrt(2))


def build_code() -> StabilizerCode:
    validate_code(GENERATORS, ERRORS)
    projectors = tuple(projector(GENERATORS, signature(e, GENERATORS)) for e in ERRORS)
    basis = BASIS.copy()
    basis.flags.writeable = False
    for P in projectors:
        P.flags.writeable = False
    return StabilizerCode(GENERATORS, ERRORS, basis, projectors)


def _check_symbol(s, atol: float) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128).reshape(-1)
    if s.shape != (2,):
        raise NormalizationError(f"symbol must have 2 entries, got {s.size}")
    norm_sq = float(np.vdot(s, s).real)
    if abs(norm_sq - 1.0) > atol:
        raise NormalizationError(f"symbol has squared norm {norm_sq}, expected 1")
    return s


def encode(s, atol: float = 1e-9) -> np.ndarray:
    """Vectorized codeword ``t = C s`` (length 8, energy 4)."""
    return BASIS @ _check_symbol(s, atol)


def encode_matrix(s, atol: float = 1e-9) -> np.ndarray:
    """2x4 space-time codeword: columns are the four channel uses."""
    return unvec_2x4(encode(s, atol))


def encode_batch(symbols: np.ndarray) -> np.ndarray:
    """Encode a ``(B, 2)`` array of unit symbols into ``(B, 2, 4)`` codewords."""
    s1, s2 = symbols[:, 0], symbols[:, 1]
    row0 = np.stack([s1, -s2, -s2, s1], axis=1)
    row1 = np.stack([-s2, -s1, s1, s2], axis=1)
    return np.stack([row0, row1], axis=1)
