"""Fourier-Galerkin truncation of the Hessian path L_lambda and the homotopy H_(lambda, s).

Basis ordering (fixed): block 0 holds the constant functions e_i (2n coordinates),
then for k = 1..N the sine block e_i sin(kt) followed by the cosine block
e_i cos(kt). Coordinate (p, i) of scalar function p and component i sits at
index p * 2n + i, with p = 0 for constants, 2k - 1 for sin(kt), 2k for cos(kt).

Operators are returned in the H^{1/2}-orthonormalized coordinates
y = G^{1/2} x, i.e. as G^{-1/2} B G^{-1/2} + delta I for the raw bilinear-form
matrix B and the diagonal Gram matrix G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Literal, Optional, Protocol

import numpy as np

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial, t_grid
from src.analysis.linalg import EigenDecomposition, SymMatrix, eig_sym, symplectic_j
from src.core.errors import DimensionError, InputError

TWO_PI = 2.0 * math.pi
DEFAULT_KERNEL_TOL = 1e-7
MIN_CUTOFF = 8
MIN_QUAD_POINTS = 64

Side = Literal["left", "right"]


@dataclass(frozen=True)
class FourierBasisSpec:
    """Truncated Fourier basis of H^{1/2}(S^1, R^2n) with modes 0..N."""

    n: int
    cutoff: int

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise InputError(f"n must be positive, got {self.n}")
        if self.cutoff <= 0:
            raise InputError(f"cutoff N must be positive, got {self.cutoff}")

    @property
    def block(self) -> int:
        return 2 * self.n

    @property
    def num_functions(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.block * self.num_functions

    def _block_slice(self, p: int) -> slice:
        return slice(p * self.block, (p + 1) * self.block)

    def constant_block(self) -> slice:
        return self._block_slice(0)

    def sine_block(self, k: int) -> slice:
        self._check_mode(k)
        return self._block_slice(2 * k - 1)

    def cosine_block(self, k: int) -> slice:
        self._check_mode(k)
        return self._block_slice(2 * k)

    def _check_mode(self, k: int) -> None:
        if not 1 <= k <= self.cutoff:
            raise InputError(f"mode {k} outside 1..{self.cutoff}")

    def mode_of_function(self) -> np.ndarray:
        """Mode number k of each scalar basis function (0 for the constant)."""
        return np.concatenate([[0], np.repeat(np.arange(1, self.cutoff + 1), 2)])

    def function_samples(self, ts: np.ndarray) -> np.ndarray:
        """Scalar basis functions [1, sin t, cos t, sin 2t, ...] at ``ts``, shape (T, 2N+1)."""
        k = np.arange(1, self.cutoff + 1)
        phase = np.outer(ts, k)
        out = np.empty((len(ts), self.num_functions))
        out[:, 0] = 1.0
        out[:, 1::2] = np.sin(phase)
        out[:, 2::2] = np.cos(phase)
        return out


@dataclass(frozen=True)
class GramWeights:
    """Diagonal of the H^{1/2} Gram matrix in basis order."""

    weights: np.ndarray

    @cached_property
    def sqrt(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.weights)


def gram_weights(spec: FourierBasisSpec) -> GramWeights:
    """2pi on constant coordinates, pi*k on both sine and cosine coordinates of mode k."""
    modes = spec.mode_of_function()
    per_function = np.where(modes == 0, TWO_PI, math.pi * modes)
    return GramWeights(np.repeat(per_function, spec.block))


def l2_weights(spec: FourierBasisSpec) -> np.ndarray:
    """Diagonal of the L^2 Gram matrix: 2pi on constants, pi on every mode coordinate."""
    modes = np.repeat(spec.mode_of_function(), spec.block)
    return np.where(modes == 0, TWO_PI, math.pi)


@lru_cache(maxsize=32)
def _q_matrix(n: int, cutoff: int) -> np.ndarray:
    spec = FourierBasisSpec(n, cutoff)
    j = symplectic_j(n)
    q = np.zeros((spec.dim, spec.dim))
    for k in range(1, cutoff + 1):
        s, c = spec.sine_block(k), spec.cosine_block(k)
        q[s, c] = math.pi * k * j.T
        q[c, s] = math.pi * k * j
    q.setflags(write=False)
    return q


def assemble_q(spec: FourierBasisSpec) -> np.ndarray:
    """Raw matrix of Q(phi_i, phi_j) = int <J phi_i', phi_j> dt.

    Zero on constants and across modes; inside mode k the sine/cosine blocks
    couple through pi*k*J^T (sine rows) and pi*k*J (cosine rows).
    """
    return _q_matrix(spec.n, spec.cutoff)


def default_quad_points(spec: FourierBasisSpec, max_freq: int) -> int:
    return max(MIN_QUAD_POINTS, 4 * (spec.cutoff + max_freq + 1))


def default_cutoff(max_freq: int, max_threshold: int = 0) -> int:
    """N = max(8, 2 (F + |k|max)), so kernels on modes up to |k|max are representable."""
    return max(MIN_CUTOFF, 2 * (max_freq + abs(max_threshold)))


@lru_cache(maxsize=32)
def _samples(n_cutoff: int, quad_points: int) -> tuple[np.ndarray, np.ndarray]:
    ts = t_grid(quad_points)
    phi = FourierBasisSpec(1, n_cutoff).function_samples(ts)
    ts.setflags(write=False)
    phi.setflags(write=False)
    return ts, phi


def assemble_poly_mult(
    spec: FourierBasisSpec, poly: TrigMatrixPolynomial, quad_points: Optional[int] = None
) -> np.ndarray:
    """Raw matrix of int <A(t) phi_i, phi_j> dt by the uniform trapezoidal rule.

    The rule is exact for the trigonometric integrand as long as
    quad_points > 2N + F, which the precondition 4(N + F + 1) guarantees.
    """
    if poly.dim != spec.block:
        raise DimensionError(f"coefficient dim {poly.dim} does not match basis dim {spec.block}")
    q = quad_points if quad_points is not None else default_quad_points(spec, poly.max_freq)
    need = 4 * (spec.cutoff + poly.max_freq + 1)
    if q < need:
        raise InputError(
            f"quad_points={q} too low for N={spec.cutoff}, F={poly.max_freq}; need {need}"
        )
    ts, phi = _samples(spec.cutoff, q)
    a = poly.evaluate_many(ts)
    raw = np.einsum("qp,qr,qij->pirj", phi, phi, a, optimize=True).reshape(spec.dim, spec.dim)
    raw *= TWO_PI / q
    return 0.5 * (raw + raw.T)


def assemble_mult(
    spec: FourierBasisSpec, fam: MatrixFamilyPath, lam: float, quad_points: Optional[int] = None
) -> np.ndarray:
    """Raw multiplication form of A_lambda(t)."""
    return assemble_poly_mult(spec, fam.polynomial_at(lam), quad_points)


def normalize(spec: FourierBasisSpec, raw: np.ndarray, delta: float = 0.0) -> np.ndarray:
    """G^{-1/2} raw G^{-1/2} + delta I."""
    inv = gram_weights(spec).inv_sqrt
    out = raw * np.outer(inv, inv)
    if delta:
        out = out + delta * np.eye(spec.dim)
    return out


@dataclass(frozen=True)
class GalerkinOperator:
    """Truncated Hessian in H^{1/2}-orthonormal coordinates."""

    spec: FourierBasisSpec
    matrix: SymMatrix
    lam: float
    delta: float = 0.0
    s: Optional[float] = None

    @cached_property
    def eigen(self) -> EigenDecomposition:
        return eig_sym(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigen.eigenvalues


def _operator_from_poly(
    spec: FourierBasisSpec,
    poly: TrigMatrixPolynomial,
    lam: float,
    delta: float,
    quad_points: Optional[int],
    s: Optional[float] = None,
) -> GalerkinOperator:
    raw = assemble_q(spec) + assemble_poly_mult(spec, poly, quad_points)
    return GalerkinOperator(spec, SymMatrix(normalize(spec, raw, delta)), lam, delta, s)


def assemble_l(
    spec: FourierBasisSpec,
    fam: MatrixFamilyPath,
    lam: float,
    delta: float = 0.0,
    quad_points: Optional[int] = None,
) -> GalerkinOperator:
    """Truncated L_lambda + delta I."""
    return _operator_from_poly(spec, fam.polynomial_at(lam), lam, delta, quad_points)


def comparison_coefficient(c0: SymMatrix, c1: SymMatrix, lam: float) -> TrigMatrixPolynomial:
    """C_lambda = (1 - lambda) C0 + lambda C1 as a constant polynomial."""
    if c0.dim != c1.dim:
        raise DimensionError(f"C0 has dim {c0.dim}, C1 has dim {c1.dim}")
    return TrigMatrixPolynomial.constant((1.0 - lam) * c0.entries + lam * c1.entries)


def homotopy_coefficient(
    fam: MatrixFamilyPath, c0: SymMatrix, c1: SymMatrix, lam: float, s: float
) -> TrigMatrixPolynomial:
    """(1 - s) A_lambda(t) + s C_lambda."""
    if c0.dim != fam.dim:
        raise DimensionError(f"C0 has dim {c0.dim}, family has dim {fam.dim}")
    return fam.polynomial_at(lam) * (1.0 - s) + comparison_coefficient(c0, c1, lam) * s


def assemble_homotopy(
    spec: FourierBasisSpec,
    fam: MatrixFamilyPath,
    c0: SymMatrix,
    c1: SymMatrix,
    lam: float,
    s: float,
    delta: float = 0.0,
    quad_points: Optional[int] = None,
) -> GalerkinOperator:
    """Truncated H_(lambda, s) + delta I; s = 0 gives L_lambda, s = 1 gives M_lambda."""
    if s == 0.0:
        return replace(assemble_l(spec, fam, lam, delta, quad_points), s=0.0)
    poly = homotopy_coefficient(fam, c0, c1, lam, s)
    return _operator_from_poly(spec, poly, lam, delta, quad_points, s)


def kernel_basis(op: GalerkinOperator, tol: float = DEFAULT_KERNEL_TOL) -> list[np.ndarray]:
    """Orthonormal eigenvectors (orthonormalized coordinates) with |eigenvalue| <= tol."""
    eig = op.eigen
    idx = np.flatnonzero(np.abs(eig.eigenvalues) <= tol)
    return [eig.eigenvectors[:, i].copy() for i in idx]


def to_orthonormal(spec: FourierBasisSpec, coefficients: np.ndarray) -> np.ndarray:
    """Map Fourier coefficient vector x to y = G^{1/2} x."""
    return gram_weights(spec).sqrt * coefficients


def pure_mode_vector(spec: FourierBasisSpec, k: int, u0: np.ndarray) -> np.ndarray:
    """Coefficients of u(t) = u0 cos(kt) + J u0 sin(kt).

    For k = 0 this is the constant u0; otherwise the cosine block of mode |k|
    holds u0 and the sine block sgn(k) J u0.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (spec.block,):
        raise DimensionError(f"u0 must have length {spec.block}")
    x = np.zeros(spec.dim)
    if k == 0:
        x[spec.constant_block()] = u0
        return x
    x[spec.cosine_block(abs(k))] = u0
    x[spec.sine_block(abs(k))] = math.copysign(1.0, k) * (symplectic_j(spec.n) @ u0)
    return x


class OperatorPath(Protocol):
    """A C^1-by-pieces path tau -> Galerkin operator on [0, 1]."""

    spec: FourierBasisSpec
    delta: float

    def operator(self, tau: float) -> GalerkinOperator: ...

    def derivative(self, tau: float, side: Side = "right") -> np.ndarray: ...

    def kinks(self) -> tuple[float, ...]: ...

    def shifted(self, delta: float) -> OperatorPath: ...


def _flip(side: Side) -> Side:
    return "left" if side == "right" else "right"


@dataclass(frozen=True)
class HessianPath:
    """lambda -> L_lambda + delta I for a coefficient family."""

    spec: FourierBasisSpec
    fam: MatrixFamilyPath
    delta: float = 0.0
    quad_points: Optional[int] = None

    def operator(self, tau: float) -> GalerkinOperator:
        return assemble_l(self.spec, self.fam, tau, self.delta, self.quad_points)

    def derivative(self, tau: float, side: Side = "right") -> np.ndarray:
        poly = self.fam.derivative_polynomial(tau, side)
        return normalize(self.spec, assemble_poly_mult(self.spec, poly, self.quad_points))

    def kinks(self) -> tuple[float, ...]:
        return tuple(lam for lam in self.fam.knot_lambdas if self.fam.has_kink(lam))

    def shifted(self, delta: float) -> HessianPath:
        return replace(self, delta=delta)


@dataclass(frozen=True)
class HomotopyEdge:
    """One coordinate line of the homotopy rectangle H_(lambda, s).

    ``axis="lambda"`` runs lambda over [0, 1] at fixed s; ``axis="s"`` runs s at
    fixed lambda.
    """

    spec: FourierBasisSpec
    fam: MatrixFamilyPath
    c0: SymMatrix
    c1: SymMatrix
    axis: Literal["lambda", "s"]
    fixed: float
    delta: float = 0.0
    quad_points: Optional[int] = None

    def _params(self, tau: float) -> tuple[float, float]:
        return (tau, self.fixed) if self.axis == "lambda" else (self.fixed, tau)

    def operator(self, tau: float) -> GalerkinOperator:
        lam, s = self._params(tau)
        return assemble_homotopy(
            self.spec, self.fam, self.c0, self.c1, lam, s, self.delta, self.quad_points
        )

    def derivative(self, tau: float, side: Side = "right") -> np.ndarray:
        lam, s = self._params(tau)
        if self.axis == "lambda":
            slope = TrigMatrixPolynomial.constant(self.c1.entries - self.c0.entries) * s
            if s != 1.0:
                slope = slope + self.fam.derivative_polynomial(lam, side) * (1.0 - s)
        else:
            slope = comparison_coefficient(self.c0, self.c1, lam) - self.fam.polynomial_at(lam)
        return normalize(self.spec, assemble_poly_mult(self.spec, slope, self.quad_points))

    def kinks(self) -> tuple[float, ...]:
        if self.axis == "s" or self.fixed == 1.0:
            return ()
        return tuple(lam for lam in self.fam.knot_lambdas if self.fam.has_kink(lam))

    def shifted(self, delta: float) -> HomotopyEdge:
        return replace(self, delta=delta)


def comparison_path(
    spec: FourierBasisSpec,
    fam: MatrixFamilyPath,
    c0: SymMatrix,
    c1: SymMatrix,
    delta: float = 0.0,
    quad_points: Optional[int] = None,
) -> HomotopyEdge:
    """M_lambda = H_(lambda, 1): Q plus the constant coefficient C_lambda."""
    return HomotopyEdge(spec, fam, c0, c1, "lambda", 1.0, delta, quad_points)


@dataclass(frozen=True)
class ReversedPath:
    """The inner path traversed from tau = 1 to tau = 0."""

    inner: OperatorPath

    @property
    def spec(self) -> FourierBasisSpec:
        return self.inner.spec

    @property
    def delta(self) -> float:
        return self.inner.delta

    def operator(self, tau: float) -> GalerkinOperator:
        return self.inner.operator(1.0 - tau)

    def derivative(self, tau: float, side: Side = "right") -> np.ndarray:
        return -self.inner.derivative(1.0 - tau, _flip(side))

    def kinks(self) -> tuple[float, ...]:
        return tuple(sorted(1.0 - k for k in self.inner.kinks()))

    def shifted(self, delta: float) -> ReversedPath:
        return ReversedPath(self.inner.shifted(delta))


@dataclass(frozen=True)
class SubPath:
    """Restriction of the inner path to [a, b], reparametrized over [0, 1]."""

    inner: OperatorPath
    a: float
    b: float
    _width: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.a < self.b <= 1.0:
            raise InputError(f"need 0 <= a < b <= 1, got [{self.a}, {self.b}]")
        object.__setattr__(self, "_width", self.b - self.a)

    @property
    def spec(self) -> FourierBasisSpec:
        return self.inner.spec

    @property
    def delta(self) -> float:
        return self.inner.delta

    def _outer(self, tau: float) -> float:
        if tau >= 1.0:
            return self.b
        return self.a + self._width * tau

    def operator(self, tau: float) -> GalerkinOperator:
        return self.inner.operator(self._outer(tau))

    def derivative(self, tau: float, side: Side = "right") -> np.ndarray:
        return self._width * self.inner.derivative(self._outer(tau), side)

    def kinks(self) -> tuple[float, ...]:
        return tuple((k - self.a) / self._width for k in self.inner.kinks() if self.a < k < self.b)

    def shifted(self, delta: float) -> SubPath:
        return SubPath(self.inner.shifted(delta), self.a, self.b)
