"""Small dense complex linear algebra on numpy arrays.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
helpers here add shape checking and the column-stacking vectorization
convention used throughout the package: ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""

from functools import reduce

import numpy as np

__all__ = [
    "DimensionError",
    "as_cmat",
    "kron",
    "vec",
    "unvec",
    "unvec_2x4",
    "matmul",
    "adjoint",
    "trace",
    "frobenius_norm_sq",
    "det_2x2",
    "eye",
]


class DimensionError(ValueError):
    """Raised when operand shapes are not conformable."""


def as_cmat(m) -> np.ndarray:
    """Coerce ``m`` to a 2-D complex array, checking finiteness.

    One-dimensional input is treated as a column vector.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"expected a non-empty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not mats:
        raise DimensionError("kron needs at least one operand")
    return reduce(np.kron, (as_cmat(m) for m in mats))


def vec(m) -> np.ndarray:
    """Column-stack ``m`` into a ``(rows*cols, 1)`` column vector."""
    a = as_cmat(m)
    return a.reshape(-1, order="F").reshape(-1, 1)


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a ``rows x cols`` target."""
    a = np.asarray(v, dtype=np.complex128).reshape(-1)
    if a.size != rows * cols:
        raise DimensionError(f"cannot reshape {a.size} entries into {rows}x{cols}")
    return a.reshape(rows, cols, order="F")


def unvec_2x4(v) -> np.ndarray:
    return unvec(v, 2, 4)


def matmul(a, b) -> np.ndarray:
    a, b = as_cmat(a), as_cmat(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmat(m).conj().T


def trace(m) -> complex:
    a = as_cmat(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"trace of non-square {a.shape}")
    return complex(np.trace(a))


def frobenius_norm_sq(m) -> float:
    a = as_cmat(m)
    return float(np.sum(a.real**2 + a.imag**2))


def det_2x2(m) -> complex:
    a = as_cmat(m)
    if a.shape != (2, 2):
        raise DimensionError(f"det_2x2 needs a 2x2 matrix, got {a.shape}")
    return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
