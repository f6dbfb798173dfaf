"""Lambda-parametrized, 2pi-periodic symmetric coefficient families A_lambda(t).

A family is a list of lambda-knots, each carrying a trigonometric matrix
polynomial; between knots the coefficient matrices are interpolated linearly.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from src.analysis.linalg import ArrayLike, SymMatrix, max_abs
from src.core.errors import DimensionError, InputError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_T_GRID = 256

MatrixInput = Union[SymMatrix, ArrayLike]


def _stack(mats: Sequence[MatrixInput], dim: Optional[int]) -> np.ndarray:
    checked = [m if isinstance(m, SymMatrix) else SymMatrix(m) for m in mats]
    if dim is None and checked:
        dim = checked[0].dim
    for m in checked:
        if m.dim != dim:
            raise DimensionError(f"coefficient of dim {m.dim} in a family of dim {dim}")
    if not checked:
        return np.zeros((0, dim or 0, dim or 0))
    return np.stack([m.entries for m in checked])


def t_grid(size: int) -> np.ndarray:
    """Uniform grid of ``size`` points on [0, 2pi), endpoint excluded."""
    return TWO_PI * np.arange(size) / size


def default_t_grid_size(max_freq: int) -> int:
    return max(DEFAULT_T_GRID, 8 * (max_freq + 1))


def resolve_t_grid_size(size: Optional[int], max_freq: int) -> int:
    """The default grid for ``size=None``; explicit grids need 4(F+1) points."""
    if size is None:
        return default_t_grid_size(max_freq)
    if size < 4 * (max_freq + 1):
        raise InputError(
            f"t-grid of {size} points is too coarse for frequency {max_freq}; "
            f"need at least {4 * (max_freq + 1)}"
        )
    return size


@dataclass(frozen=True, eq=False)
class TrigMatrixPolynomial:
    """A(t) = C_0 + sum_{m=1..F} (C_m cos(mt) + S_m sin(mt)) with symmetric C_m, S_m.

    ``cos_coeffs`` has shape (F+1, 2n, 2n), ``sin_coeffs`` shape (F, 2n, 2n).
    """

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self) -> None:
        c, s = self.cos_coeffs, self.sin_coeffs
        if c.ndim != 3 or c.shape[0] < 1:
            raise InputError("a trigonometric polynomial needs a constant term")
        if s.shape[1:] != c.shape[1:] or s.shape[0] != c.shape[0] - 1:
            raise DimensionError(
                f"need F+1 cosine and F sine coefficients, got {c.shape[0]} and {s.shape[0]}"
            )
        c.setflags(write=False)
        s.setflags(write=False)

    @classmethod
    def from_matrices(
        cls, cos_coeffs: Sequence[MatrixInput], sin_coeffs: Sequence[MatrixInput] = ()
    ) -> TrigMatrixPolynomial:
        """Build from symmetric matrices; missing sine terms are zero."""
        if not cos_coeffs:
            raise InputError("a trigonometric polynomial needs a constant term")
        c = _stack(cos_coeffs, None)
        dim = c.shape[1]
        s = _stack(sin_coeffs, dim)
        freq = max(c.shape[0] - 1, s.shape[0])
        c = np.concatenate([c, np.zeros((freq + 1 - c.shape[0], dim, dim))])
        s = np.concatenate([s, np.zeros((freq - s.shape[0], dim, dim))])
        return cls(c, s)

    @classmethod
    def constant(cls, matrix: MatrixInput) -> TrigMatrixPolynomial:
        return cls.from_matrices([matrix])

    @classmethod
    def scalar(cls, c: float, n: int) -> TrigMatrixPolynomial:
        return cls.constant(c * np.eye(2 * n))

    @property
    def dim(self) -> int:
        return self.cos_coeffs.shape[1]

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def max_freq(self) -> int:
        return self.sin_coeffs.shape[0]

    def padded(self, max_freq: int) -> TrigMatrixPolynomial:
        """Same polynomial with zero coefficients up to ``max_freq``."""
        extra = max_freq - self.max_freq
        if extra <= 0:
            return self
        pad = np.zeros((extra, self.dim, self.dim))
        return TrigMatrixPolynomial(
            np.concatenate([self.cos_coeffs, pad]), np.concatenate([self.sin_coeffs, pad])
        )

    def _aligned(self, other: TrigMatrixPolynomial) -> tuple[TrigMatrixPolynomial, ...]:
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        freq = max(self.max_freq, other.max_freq)
        return self.padded(freq), other.padded(freq)

    def __add__(self, other: TrigMatrixPolynomial) -> TrigMatrixPolynomial:
        a, b = self._aligned(other)
        return TrigMatrixPolynomial(a.cos_coeffs + b.cos_coeffs, a.sin_coeffs + b.sin_coeffs)

    def __sub__(self, other: TrigMatrixPolynomial) -> TrigMatrixPolynomial:
        return self + other * -1.0

    def __mul__(self, c: float) -> TrigMatrixPolynomial:
        return TrigMatrixPolynomial(float(c) * self.cos_coeffs, float(c) * self.sin_coeffs)

    __rmul__ = __mul__

    def trig_basis(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """cos(m t) for m = 0..F and sin(m t) for m = 1..F, shape (T, F+1) / (T, F)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        m = np.arange(self.max_freq + 1)
        phase = np.outer(ts, m)
        return np.cos(phase), np.sin(phase[:, 1:])

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        """A(t) for every t in ``ts``, shape (T, 2n, 2n)."""
        cos_b, sin_b = self.trig_basis(ts)
        out = np.einsum("tm,mij->tij", cos_b, self.cos_coeffs)
        if self.max_freq:
            out = out + np.einsum("tm,mij->tij", sin_b, self.sin_coeffs)
        return out

    def evaluate(self, t: float) -> SymMatrix:
        return SymMatrix(self.evaluate_many(np.array([t]))[0])

    def mean(self) -> SymMatrix:
        """Average of A(t) over one period (the constant term)."""
        return SymMatrix(self.cos_coeffs[0])

    def is_constant(self) -> bool:
        return max_abs(self.cos_coeffs[1:]) == 0.0 and max_abs(self.sin_coeffs) == 0.0

    def equals(self, other: TrigMatrixPolynomial) -> bool:
        a, b = self._aligned(other)
        return bool(
            np.array_equal(a.cos_coeffs, b.cos_coeffs)
            and np.array_equal(a.sin_coeffs, b.sin_coeffs)
        )


class Knot(NamedTuple):
    lam: float
    poly: TrigMatrixPolynomial


class LambdaDerivative(NamedTuple):
    """d/dlambda A_lambda(t); ``at_knot`` flags a one-sided (right) value."""

    matrix: SymMatrix
    at_knot: bool


class MatrixFamilyPath:
    """Piecewise-linear path lambda -> A_lambda(.) through trigonometric polynomials."""

    def __init__(self, knots: Sequence[tuple[float, TrigMatrixPolynomial]]) -> None:
        if len(knots) < 2:
            raise InputError("a family needs at least two knots (lambda = 0 and lambda = 1)")
        lams = [float(lam) for lam, _ in knots]
        if lams[0] != 0.0 or lams[-1] != 1.0:
            raise InputError(f"knots must span [0, 1], got [{lams[0]}, {lams[-1]}]")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise InputError("knot lambdas must be strictly increasing")
        dims = {poly.dim for _, poly in knots}
        if len(dims) != 1:
            raise DimensionError(f"all knots must share one dimension, got {sorted(dims)}")
        self.knots: tuple[Knot, ...] = tuple(Knot(float(lam), poly) for lam, poly in knots)
        self._lams = lams

    @classmethod
    def constant(cls, poly: TrigMatrixPolynomial) -> MatrixFamilyPath:
        return cls([(0.0, poly), (1.0, poly)])

    @classmethod
    def scalar(cls, values: Sequence[tuple[float, float]], n: int) -> MatrixFamilyPath:
        """Family c(lambda) I_2n with c piecewise linear through ``values``."""
        return cls([(lam, TrigMatrixPolynomial.scalar(c, n)) for lam, c in values])

    @property
    def dim(self) -> int:
        return self.knots[0].poly.dim

    @property
    def n(self) -> int:
        return self.dim // 2

    @property
    def max_freq(self) -> int:
        return max(k.poly.max_freq for k in self.knots)

    @property
    def knot_lambdas(self) -> tuple[float, ...]:
        return tuple(self._lams)

    def is_knot(self, lam: float) -> bool:
        return lam in self._lams

    def _check_lambda(self, lam: float) -> None:
        if not 0.0 <= lam <= 1.0:
            raise InputError(f"lambda must lie in [0, 1], got {lam}")

    def _segment(self, lam: float, side: str = "right") -> int:
        """Index j of the segment [lam_j, lam_{j+1}] used at ``lam``."""
        if side == "left":
            j = bisect.bisect_left(self._lams, lam) - 1
        else:
            j = bisect.bisect_right(self._lams, lam) - 1
        return min(max(j, 0), len(self._lams) - 2)

    def polynomial_at(self, lam: float) -> TrigMatrixPolynomial:
        """A_lambda as a trigonometric polynomial; exact copy of the knot poly at knots."""
        self._check_lambda(lam)
        j = self._segment(lam)
        lo, hi = self.knots[j], self.knots[j + 1]
        if lam == lo.lam:
            return lo.poly
        if lam == hi.lam:
            return hi.poly
        w = (lam - lo.lam) / (hi.lam - lo.lam)
        return lo.poly * (1.0 - w) + hi.poly * w

    def derivative_polynomial(self, lam: float, side: str = "right") -> TrigMatrixPolynomial:
        """d/dlambda A_lambda on the segment containing lam (one-sided at knots)."""
        self._check_lambda(lam)
        j = self._segment(lam, side)
        lo, hi = self.knots[j], self.knots[j + 1]
        return (hi.poly - lo.poly) * (1.0 / (hi.lam - lo.lam))

    def has_kink(self, lam: float) -> bool:
        """True at interior knots where the one-sided derivatives differ."""
        if lam <= 0.0 or lam >= 1.0 or not self.is_knot(lam):
            return False
        left = self.derivative_polynomial(lam, "left")
        right = self.derivative_polynomial(lam, "right")
        return not left.equals(right)

    def evaluate(self, lam: float, t: float) -> SymMatrix:
        return self.polynomial_at(lam).evaluate(t)

    def derivative_lambda(self, lam: float, t: float) -> LambdaDerivative:
        at_knot = self.has_kink(lam)
        if at_knot:
            log.warning("lambda=%g is a knot; returning the right derivative", lam)
        return LambdaDerivative(self.derivative_polynomial(lam).evaluate(t), at_knot)

    def scaled(self, s: float) -> MatrixFamilyPath:
        return MatrixFamilyPath([(k.lam, k.poly * s) for k in self.knots])

    def reversed(self) -> MatrixFamilyPath:
        """The family traversed backwards: lambda -> A_{1 - lambda}."""
        return MatrixFamilyPath([(1.0 - k.lam, k.poly) for k in reversed(self.knots)])


def spectral_bounds(
    fam: MatrixFamilyPath, lam: float, t_grid_size: Optional[int] = None
) -> tuple[float, float]:
    """(alpha, beta): min of the smallest and max of the largest eigenvalue of A_lambda(t).

    Extremes are taken over a uniform t-grid, so the values are grid-certified.
    """
    poly = fam.polynomial_at(lam)
    size = resolve_t_grid_size(t_grid_size, poly.max_freq)
    eigs = np.linalg.eigvalsh(poly.evaluate_many(t_grid(size)))
    return float(eigs[:, 0].min()), float(eigs[:, -1].max())
