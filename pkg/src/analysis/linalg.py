"""Dense symmetric-matrix algebra: eigensolvers, Morse index, Loewner order, J utilities.

Norms written ``||X||_inf`` in this module are the largest absolute entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from src.core.errors import ConvergenceError, DimensionError, InputError, SymmetryError

DEFAULT_TOL = 1e-9
SYMMETRY_TOL = 1e-12
INTEGER_SNAP_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]
EigenMethod = Literal["lapack", "jacobi"]


def max_abs(x: np.ndarray) -> float:
    """Largest absolute entry (0 for empty arrays)."""
    return float(np.max(np.abs(x))) if x.size else 0.0


class SymMatrix:
    """Immutable real symmetric matrix.

    Phase-space matrices (coefficients, C0/C1, Galerkin blocks) have even
    dimension 2n; pass ``even=False`` for quadratic forms on kernels.
    Round-off asymmetry up to ``SYMMETRY_TOL * (1 + ||A||)`` is removed by
    symmetrizing; anything larger is rejected.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: ArrayLike, *, even: bool = True) -> None:
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] == 0:
            raise DimensionError("matrix dimension must be positive")
        if even and a.shape[0] % 2:
            raise DimensionError(f"phase-space matrices need even dimension, got {a.shape[0]}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix has non-finite entries")
        skew = max_abs(a - a.T)
        if skew > SYMMETRY_TOL * (1.0 + max_abs(a)):
            raise SymmetryError(f"matrix is not symmetric (max |A - A^T| = {skew:.3e})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._entries = a

    @classmethod
    def identity(cls, dim: int) -> SymMatrix:
        return cls(np.eye(dim))

    @classmethod
    def scalar(cls, c: float, dim: int) -> SymMatrix:
        return cls(c * np.eye(dim))

    @classmethod
    def diag(cls, values: Sequence[float], *, even: bool = True) -> SymMatrix:
        return cls(np.diag(np.asarray(values, dtype=float)), even=even)

    @property
    def entries(self) -> np.ndarray:
        """Read-only dim x dim array."""
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def n(self) -> int:
        """Half dimension (number of degrees of freedom)."""
        return self.dim // 2

    def norm(self) -> float:
        return max_abs(self._entries)

    def _check_dim(self, other: SymMatrix) -> None:
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: SymMatrix) -> SymMatrix:
        self._check_dim(other)
        return SymMatrix(self._entries + other._entries, even=self.dim % 2 == 0)

    def __sub__(self, other: SymMatrix) -> SymMatrix:
        self._check_dim(other)
        return SymMatrix(self._entries - other._entries, even=self.dim % 2 == 0)

    def __mul__(self, c: float) -> SymMatrix:
        return SymMatrix(float(c) * self._entries, even=self.dim % 2 == 0)

    __rmul__ = __mul__

    def __neg__(self) -> SymMatrix:
        return self * -1.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self._entries.shape == other._entries.shape and bool(
            np.array_equal(self._entries, other._entries)
        )

    def __hash__(self) -> int:
        return hash((self.dim, self._entries.tobytes()))

    def __repr__(self) -> str:
        return f"SymMatrix(dim={self.dim}, entries={self._entries.tolist()!r})"

    def tolist(self) -> list[list[float]]:
        return self._entries.tolist()


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def symplectic_j(n: int) -> np.ndarray:
    """Standard symplectic matrix [[0, -I_n], [I_n, 0]]."""
    if n <= 0:
        raise InputError(f"n must be positive, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def _as_array(a: Union[SymMatrix, np.ndarray]) -> np.ndarray:
    return a.entries if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)


def jacobi_eigh(
    a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS, rtol: float = 1e-15
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotation method for a dense symmetric matrix.

    Sweeps over all (p, q) pairs row by row; each rotation zeroes a[p, q].
    Stops when the off-diagonal Frobenius norm drops below ``rtol * ||A||_F``.
    """
    a = np.array(a, dtype=float)
    d = a.shape[0]
    v = np.eye(d)
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    off = 0.0
    for _ in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= rtol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= np.finfo(float).tiny:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off > rtol * scale:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eig_sym(
    a: SymMatrix, method: EigenMethod = "lapack", max_sweeps: int = JACOBI_MAX_SWEEPS
) -> EigenDecomposition:
    """Eigendecomposition with ascending eigenvalues.

    ``method="jacobi"`` runs the cyclic Jacobi solver; ``"lapack"`` calls
    ``numpy.linalg.eigh``. Both return orthonormal eigenvectors.
    """
    if not isinstance(a, SymMatrix):
        raise InputError("eig_sym expects a SymMatrix")
    if method == "jacobi":
        w, v = jacobi_eigh(a.entries, max_sweeps=max_sweeps)
    elif method == "lapack":
        w, v = np.linalg.eigh(a.entries)
    else:
        raise InputError(f"unknown eigen method: {method!r}")
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def eigvals_sym(a: Union[SymMatrix, np.ndarray]) -> np.ndarray:
    """Ascending eigenvalues only (LAPACK)."""
    return np.linalg.eigvalsh(_as_array(a))


def morse_index(a: Union[SymMatrix, np.ndarray], tol: float = DEFAULT_TOL) -> int:
    """Number of eigenvalues below -tol, counted with multiplicity."""
    if tol < 0:
        raise InputError(f"tolerance must be non-negative, got {tol}")
    return int(np.count_nonzero(eigvals_sym(a) < -tol))


def nullity(a: Union[SymMatrix, np.ndarray], tol: float = DEFAULT_TOL) -> int:
    """Number of eigenvalues within tol of zero."""
    return int(np.count_nonzero(np.abs(eigvals_sym(a)) <= tol))


def loewner_margin(a: SymMatrix, b: SymMatrix) -> float:
    """Smallest eigenvalue of b - a; non-negative iff a <= b."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(eigvals_sym(b.entries - a.entries)[0])


def loewner_leq(a: SymMatrix, b: SymMatrix, tol: float = DEFAULT_TOL) -> bool:
    """Loewner order a <= b, i.e. b - a positive semidefinite up to tol."""
    return loewner_margin(a, b) >= -tol


def commutes_with_j(c: SymMatrix, tol: float = DEFAULT_TOL) -> bool:
    """True iff ||JC - CJ||_inf <= tol * (1 + ||C||_inf)."""
    j = symplectic_j(c.n)
    m = c.entries
    return max_abs(j @ m - m @ j) <= tol * (1.0 + c.norm())


def exp_cj(c: float, t: float, n: int) -> np.ndarray:
    """exp(c J t) = cos(ct) I + sin(ct) J, using J^2 = -I."""
    ct = c * t
    return math.cos(ct) * np.eye(2 * n) + math.sin(ct) * symplectic_j(n)


def symplectic_residual(m: np.ndarray) -> float:
    """||M^T J M - J||_inf."""
    j = symplectic_j(m.shape[0] // 2)
    return max_abs(m.T @ j @ m - j)


def snap_integer(x: float, tol: float = INTEGER_SNAP_TOL) -> float:
    """Round x to the nearest integer when it lies within tol of it."""
    r = round(x)
    return float(r) if abs(x - r) <= tol else float(x)


def count_integers_half_open(a: float, b: float) -> int:
    """Cardinality of (a, b] intersected with the integers."""
    if a > b:
        raise InputError(f"empty interval: a={a} > b={b}")
    return int(math.floor(snap_integer(b)) - math.floor(snap_integer(a)))


def integers_half_open(a: float, b: float) -> list[int]:
    """Elements of (a, b] intersected with the integers, ascending."""
    lo = int(math.floor(snap_integer(a))) + 1
    return list(range(lo, lo + count_integers_half_open(a, b)))
