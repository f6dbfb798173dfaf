"""Monodromy oracle: fundamental solution of J u' + A_lambda(t) u = 0 over one period.

Writing the system as X' = J A(t) X (J^{-1} = -J), each classical RK4 step is
linear in X, so it equals multiplication by a step propagator

    P = I + h/6 (K1 + 2 K2 + 2 K3 + K4),  K1 = F0, K2 = F_half (I + h/2 K1),
    K3 = F_half (I + h/2 K2),             K4 = F1 (I + h K3),

with F = J A. All propagators are formed in one batched product and the
monodromy M = P_{K-1} ... P_0 is reduced pairwise, which is bit-reproducible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial
from src.analysis.linalg import exp_cj, max_abs, symplectic_j, symplectic_residual
from src.core.errors import InputError
from src.utils.parallel import parallel_map

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_STEPS = 2048
MIN_STEPS = 64
DEFAULT_KERNEL_TOL = 1e-7
MIN_LAMBDA_GRID = 16
SCAN_XATOL = 1e-12
UNRESOLVED_FACTOR = 100.0
SUBGRID = 24
MAX_SCAN_DEPTH = 3


@dataclass(frozen=True)
class MonodromyResult:
    lam: float
    matrix: np.ndarray
    symplectic_residual: float
    det_mi: float
    kernel_dim: int
    steps: int
    singular_values: np.ndarray

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])


@dataclass(frozen=True)
class SingularPoint:
    """A lambda where the linearized system has nontrivial periodic solutions."""

    lam: float
    kernel_dim: int
    sigma_min: float
    resolved: bool = True


def _step_propagators(poly: TrigMatrixPolynomial, steps: int) -> np.ndarray:
    h = TWO_PI / steps
    ts = np.arange(2 * steps + 1) * (h / 2.0)
    j = symplectic_j(poly.n)
    f = np.einsum("ij,tjk->tik", j, poly.evaluate_many(ts))
    f0, f_half, f1 = f[0:-1:2], f[1::2], f[2::2]
    eye = np.eye(poly.dim)
    k1 = f0
    k2 = f_half @ (eye + 0.5 * h * k1)
    k3 = f_half @ (eye + 0.5 * h * k2)
    k4 = f1 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """mats[-1] @ ... @ mats[0] by pairwise reduction."""
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(mats.shape[1])[None]])
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def fundamental_matrix(poly: TrigMatrixPolynomial, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """X(2pi) for X' = J A(t) X, X(0) = I, by fixed-step RK4."""
    if steps < MIN_STEPS:
        raise InputError(f"steps must be at least {MIN_STEPS}, got {steps}")
    return _ordered_product(_step_propagators(poly, steps))


def _kernel_threshold(m: np.ndarray, tol: float) -> float:
    return tol * (1.0 + max_abs(m))


def kernel_dimension(m: np.ndarray, tol: float = DEFAULT_KERNEL_TOL) -> int:
    """dim ker(M - I): singular values of M - I below tol * (1 + ||M||)."""
    sv = np.linalg.svd(m - np.eye(m.shape[0]), compute_uv=False)
    return int(np.count_nonzero(sv <= _kernel_threshold(m, tol)))


def integrate_fundamental(
    fam: MatrixFamilyPath, lam: float, steps: int = DEFAULT_STEPS, tol: float = DEFAULT_KERNEL_TOL
) -> MonodromyResult:
    m = fundamental_matrix(fam.polynomial_at(lam), steps)
    shifted = m - np.eye(m.shape[0])
    return MonodromyResult(
        lam=lam,
        matrix=m,
        symplectic_residual=symplectic_residual(m),
        det_mi=float(np.linalg.det(shifted)),
        kernel_dim=kernel_dimension(m, tol),
        steps=steps,
        singular_values=np.linalg.svd(shifted, compute_uv=False),
    )


def endpoint_invertibility(
    fam: MatrixFamilyPath, steps: int = DEFAULT_STEPS, tol: float = DEFAULT_KERNEL_TOL
) -> tuple[bool, bool]:
    """(ker at lambda=0 trivial, ker at lambda=1 trivial)."""
    return (
        integrate_fundamental(fam, 0.0, steps, tol).kernel_dim == 0,
        integrate_fundamental(fam, 1.0, steps, tol).kernel_dim == 0,
    )


def _grid_minima(values: np.ndarray, tol: float) -> list[int]:
    """Indices of sampled local minima."""
    out = []
    for i in range(len(values)):
        neighbors = values[max(i - 1, 0) : i + 2]
        # flat stretches are minima only when they are singular
        flat = values[i] >= neighbors.max() and values[i] > tol
        if values[i] <= neighbors.min() and not flat:
            out.append(i)
    return out


@dataclass(frozen=True)
class _Candidate:
    lam: float
    sigma: float


@dataclass
class _MinimumSearch:
    """Singular-lambda candidates for one family.

    Minima are located on g = |det(M - I)|^(1/2n), which vanishes at every
    singular lambda and rises between any two of them whatever their
    singular-value slopes, then polished on sigma_min(M - I). Each small
    minimum is searched again on a subgrid spanning three cells either side
    of it, so a second singular lambda closer than two cells shows up one
    level down. Levels stop at MAX_SCAN_DEPTH.
    """

    fam: MatrixFamilyPath
    steps: int
    tol: float

    def shifted(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        m = fundamental_matrix(self.fam.polynomial_at(lam), self.steps)
        return m, m - np.eye(self.fam.dim)

    def indicator(self, lam: float) -> tuple[float, float]:
        """(g, det(M - I)) at lambda."""
        det = float(np.linalg.det(self.shifted(lam)[1]))
        return abs(det) ** (1.0 / self.fam.dim), det

    def sigma(self, lam: float) -> float:
        return float(np.linalg.svd(self.shifted(lam)[1], compute_uv=False)[-1])

    def _bounded_min(
        self, fn: Callable[[float], float], lo: float, hi: float
    ) -> tuple[float, float]:
        res = minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": SCAN_XATOL})
        lam, value = float(res.x), float(res.fun)
        for edge in (lo, hi):
            edge_value = fn(edge)
            if edge_value < value:
                lam, value = edge, edge_value
        return lam, value

    def refine(self, lo: float, hi: float, width: float) -> _Candidate:
        lam, _ = self._bounded_min(lambda x: self.indicator(x)[0], lo, hi)
        lam, value = self._bounded_min(self.sigma, max(lam - width, 0.0), min(lam + width, 1.0))
        return _Candidate(lam, value)

    def is_small(self, c: _Candidate) -> bool:
        m, _ = self.shifted(c.lam)
        return c.sigma <= UNRESOLVED_FACTOR * _kernel_threshold(m, self.tol)

    def minima(self, lo: float, hi: float, depth: int = 0) -> list[_Candidate]:
        """Refined minima in [lo, hi], small ones searched again one level down."""
        ts = np.linspace(lo, hi, SUBGRID + 1)
        width = (hi - lo) / SUBGRID
        g = np.array([self.indicator(float(t))[0] for t in ts])
        found: list[_Candidate] = []
        for i in _grid_minima(g, self.tol):
            c = self.refine(float(ts[max(i - 1, 0)]), float(ts[min(i + 1, SUBGRID)]), width)
            found.append(c)
            if depth < MAX_SCAN_DEPTH and self.is_small(c):
                window = (max(c.lam - 3.0 * width, 0.0), min(c.lam + 3.0 * width, 1.0))
                found += self.minima(*window, depth + 1)
        return found


def _dedupe(found: list[_Candidate], radius: float) -> list[_Candidate]:
    """Collapse refinements within radius of each other, keeping the smallest sigma."""
    out: list[_Candidate] = []
    for c in sorted(found, key=lambda c: c.lam):
        if out and c.lam - out[-1].lam <= radius:
            if c.sigma < out[-1].sigma:
                out[-1] = c
            continue
        out.append(c)
    return out


def scan_lambda(
    fam: MatrixFamilyPath,
    lambda_grid: int = 64,
    steps: int = DEFAULT_STEPS,
    tol: float = DEFAULT_KERNEL_TOL,
) -> list[SingularPoint]:
    """Singular lambdas: zeros of det(M(lambda) - I), located by sigma_min(M - I).

    Grid minima of |det(M - I)|^(1/2n) and grid cells where det(M - I)
    changes sign are searched on finer subgrids; a refined minimum counts
    when sigma_min <= tol * (1 + ||M||). Minima that stay within a factor
    UNRESOLVED_FACTOR of the threshold, and sign changes of det(M - I) with
    no singular lambda found in their cell, are reported as unresolved.
    Minima closer than the finest subgrid spacing are one singular lambda.
    """
    if lambda_grid < MIN_LAMBDA_GRID:
        raise InputError(f"lambda_grid must be at least {MIN_LAMBDA_GRID}, got {lambda_grid}")
    if steps < MIN_STEPS:
        raise InputError(f"steps must be at least {MIN_STEPS}, got {steps}")
    search = _MinimumSearch(fam, steps, tol)
    grid = np.linspace(0.0, 1.0, lambda_grid + 1)
    samples = np.array(parallel_map(lambda lam: search.indicator(float(lam)), grid))
    g, det = samples[:, 0], samples[:, 1]

    last = len(grid) - 1
    brackets = [
        (float(grid[max(i - 1, 0)]), float(grid[min(i + 1, last)])) for i in _grid_minima(g, tol)
    ]
    sign_cells = [
        (float(grid[i]), float(grid[i + 1])) for i in range(last) if det[i] * det[i + 1] < 0.0
    ]
    parts = parallel_map(lambda b: search.minima(*b), brackets + sign_cells)
    finest = 2.0 / (lambda_grid * SUBGRID * 4.0**MAX_SCAN_DEPTH)
    found = _dedupe([c for part in parts for c in part], finest)

    points: list[SingularPoint] = []
    for c in found:
        result = integrate_fundamental(fam, c.lam, steps, tol)
        if result.kernel_dim > 0:
            points.append(SingularPoint(c.lam, result.kernel_dim, result.sigma_min))
        elif result.sigma_min <= UNRESOLVED_FACTOR * _kernel_threshold(result.matrix, tol):
            log.warning(
                "unresolved singular-value minimum %.3e at lambda=%.10g", result.sigma_min, c.lam
            )
            points.append(SingularPoint(c.lam, 0, result.sigma_min, resolved=False))

    for lo, hi in sign_cells:
        if any(lo <= p.lam <= hi for p in points):
            continue
        inside = [c for c in found if lo <= c.lam <= hi]
        best = min(inside, key=lambda c: c.sigma) if inside else search.refine(lo, hi, hi - lo)
        log.warning("det(M - I) changes sign in [%.10g, %.10g] with no resolved zero", lo, hi)
        points.append(SingularPoint(best.lam, 0, best.sigma, resolved=False))
    return sorted(points, key=lambda p: p.lam)


def observed_order(fam: MatrixFamilyPath, lam: float, steps: int = 128) -> Optional[float]:
    """Convergence order from monodromies at steps, 2 steps and 4 steps.

    None when the coarse and fine results already agree to the last bit,
    as for A = 0.
    """
    poly = fam.polynomial_at(lam)
    coarse, mid, fine = (fundamental_matrix(poly, s) for s in (steps, 2 * steps, 4 * steps))
    first, second = max_abs(coarse - mid), max_abs(mid - fine)
    if first == 0.0 or second == 0.0:
        return None
    return math.log2(first / second)


def closed_form_monodromy(c: float, n: int) -> np.ndarray:
    """exp(2 pi c J), the monodromy of the constant family c I."""
    return exp_cj(c, TWO_PI, n)
