"""Spectral flow of Galerkin operator paths via crossing forms.

Crossings are located by bisection on the Morse index between grid points,
analysed with the crossing form of the path derivative on the kernel and
summed with the endpoint conventions of the crossing formula:

    sfl = -m^-(Gamma(a)) + sum_interior sgn(Gamma) + m^-(-Gamma(b)).

Orientation: sfl counts eigenvalues moving from negative to positive.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from src.analysis.galerkin import DEFAULT_KERNEL_TOL, OperatorPath
from src.analysis.linalg import SymMatrix, max_abs
from src.core.errors import (
    ClusterError,
    EndpointError,
    InputError,
    NumericalError,
    RetriesExhaustedError,
)
from src.utils.parallel import parallel_map

log = logging.getLogger(__name__)

MIN_LAMBDA_GRID = 16
DEFAULT_LAMBDA_GRID = 64
REFINE_WIDTH = 1e-10
MERGE_DISTANCE = 1e-8
MAX_CLUSTER_DEPTH = 24
FORM_TOL = 1e-9
DERIVATIVE_STEP = 1e-6
DERIVATIVE_AGREEMENT = 1e-6

Position = Literal["start", "interior", "end"]


@dataclass(frozen=True)
class DeltaPolicy:
    """How the regularizing shift delta is chosen.

    ``delta=None`` starts unshifted; every retry draws delta uniformly from
    [low * tol_kernel, high * tol_kernel] with a generator seeded by ``seed``.
    A numeric ``delta`` is final: irregular crossings under it are not retried.
    """

    delta: Optional[float] = None
    seed: int = 0
    max_retries: int = 5
    low: float = 10.0
    high: float = 100.0


@dataclass(frozen=True)
class Crossing:
    lam: float
    kernel_dim: int
    form_matrix: SymMatrix
    signature: int
    regular: bool
    contribution: int
    position: Position = "interior"
    left_form_matrix: Optional[SymMatrix] = None
    morse_jump: Optional[int] = None

    @property
    def positive_definite(self) -> bool:
        return self.regular and self.signature == self.kernel_dim and self.left_form_matrix is None


@dataclass(frozen=True)
class EigenTraces:
    lambdas: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class SflResult:
    value: int
    crossings: tuple[Crossing, ...]
    delta_used: float
    cutoff_n: int
    lambda_grid: int
    all_regular: bool
    seed: int
    attempts: int
    morse_difference: int
    traces: Optional[EigenTraces] = None

    @property
    def max_kernel_dim(self) -> int:
        return max((c.kernel_dim for c in self.crossings), default=0)


@dataclass(frozen=True)
class CrossingForm:
    """Crossing form on the kernel; ``left`` is set only at kinks of the path."""

    right: SymMatrix
    left: Optional[SymMatrix]
    signature: int
    regular: bool


def _spectrum(path: OperatorPath, tau: float) -> np.ndarray:
    return np.linalg.eigvalsh(path.operator(tau).matrix.entries)


def _morse(path: OperatorPath, tau: float) -> int:
    return int(np.count_nonzero(_spectrum(path, tau) < 0.0))


def _inertia(form: np.ndarray, tol: float) -> tuple[int, int, int]:
    """(#positive, #negative, #zero) eigenvalues of a small symmetric matrix."""
    w = np.linalg.eigvalsh(form)
    pos = int(np.count_nonzero(w > tol))
    neg = int(np.count_nonzero(w < -tol))
    return pos, neg, len(w) - pos - neg


@dataclass
class _Scan:
    grid: np.ndarray
    spectra: np.ndarray
    morse: list[int]
    candidates: list[float]


def _locate(
    path: OperatorPath, lo: float, hi: float, m_lo: int, m_hi: int, depth: int = 0
) -> list[float]:
    """All points in (lo, hi] where the Morse index changes, each to REFINE_WIDTH."""
    if m_lo == m_hi:
        return []
    if depth > MAX_CLUSTER_DEPTH:
        raise ClusterError(
            f"unresolved cluster of crossings in [{lo:.12g}, {hi:.12g}]; "
            "use a finer lambda grid or a different delta"
        )
    a, b = lo, hi
    while b - a > REFINE_WIDTH:
        mid = 0.5 * (a + b)
        if _morse(path, mid) != m_lo:
            b = mid
        else:
            a = mid
    star = 0.5 * (a + b)
    found = [star]
    left, right = star - MERGE_DISTANCE, star + MERGE_DISTANCE
    if left > lo:
        found = _locate(path, lo, left, m_lo, _morse(path, left), depth + 1) + found
    if right < hi:
        found += _locate(path, right, hi, _morse(path, right), m_hi, depth + 1)
    return found


def _near_zero_minima(path: OperatorPath, scan: _Scan, tol_kernel: float) -> list[float]:
    """Touching zeros: local minima of min|eig| without a Morse change around them."""
    smallest = np.min(np.abs(scan.spectra), axis=1)
    out = []
    for i in range(1, len(scan.grid) - 1):
        if not scan.morse[i - 1] == scan.morse[i] == scan.morse[i + 1]:
            continue
        s_prev, s, s_next = smallest[i - 1], smallest[i], smallest[i + 1]
        if s > s_prev or s > s_next or s >= max(s_prev - s, s_next - s):
            continue
        res = minimize_scalar(
            lambda tau: float(np.min(np.abs(_spectrum(path, tau)))),
            bounds=(scan.grid[i - 1], scan.grid[i + 1]),
            method="bounded",
            options={"xatol": REFINE_WIDTH},
        )
        if res.fun <= tol_kernel:
            out.append(float(res.x))
    return out


def _merge(points: list[float]) -> list[float]:
    """Merge points closer than MERGE_DISTANCE, preferring exact endpoints."""
    merged: list[list[float]] = []
    for p in sorted(points):
        if merged and p - merged[-1][-1] <= MERGE_DISTANCE:
            merged[-1].append(p)
        else:
            merged.append([p])
    out = []
    for group in merged:
        if 0.0 in group:
            out.append(0.0)
        elif 1.0 in group:
            out.append(1.0)
        else:
            out.append(float(np.mean(group)))
    return out


def _scan(path: OperatorPath, lambda_grid: int, tol_kernel: float) -> _Scan:
    if lambda_grid < MIN_LAMBDA_GRID:
        raise InputError(f"lambda_grid must be at least {MIN_LAMBDA_GRID}, got {lambda_grid}")
    grid = np.linspace(0.0, 1.0, lambda_grid + 1)
    spectra = np.array(parallel_map(lambda tau: _spectrum(path, float(tau)), grid))
    morse = [int(np.count_nonzero(row < 0.0)) for row in spectra]
    scan = _Scan(grid, spectra, morse, [])
    points: list[float] = []
    if np.min(np.abs(spectra[0])) <= tol_kernel:
        points.append(0.0)
    if np.min(np.abs(spectra[-1])) <= tol_kernel:
        points.append(1.0)
    for i in range(lambda_grid):
        points += _locate(path, float(grid[i]), float(grid[i + 1]), morse[i], morse[i + 1])
    points += _near_zero_minima(path, scan, tol_kernel)
    scan.candidates = _merge(points)
    return scan


def detect_crossings(
    path: OperatorPath,
    lambda_grid: int = DEFAULT_LAMBDA_GRID,
    tol_kernel: float = DEFAULT_KERNEL_TOL,
) -> list[float]:
    """Crossing locations in [0, 1], refined to REFINE_WIDTH."""
    return _scan(path, lambda_grid, tol_kernel).candidates


def _finite_difference(path: OperatorPath, tau: float, step: float) -> np.ndarray:
    lo, hi = max(tau - step, 0.0), min(tau + step, 1.0)
    upper = path.operator(hi).matrix.entries
    lower = path.operator(lo).matrix.entries
    return (upper - lower) / (hi - lo)


def crossing_form(
    path: OperatorPath,
    lam: float,
    kernel: list[np.ndarray],
    d_lambda: float = DERIVATIVE_STEP,
    check_derivative: bool = True,
) -> CrossingForm:
    """Gamma[u] = <dL/dlambda u, u> restricted to the kernel.

    The derivative comes from the family's piecewise-linear lambda structure;
    away from kinks it is compared with a central difference of step d_lambda.
    """
    if not kernel:
        raise InputError("crossing form needs a non-empty kernel")
    k = np.column_stack(kernel)
    kinked = lam in path.kinks()
    right_d = path.derivative(lam, "left" if lam >= 1.0 else "right")
    if check_derivative and not kinked:
        fd = _finite_difference(path, lam, d_lambda)
        gap = max_abs(fd - right_d)
        if gap > DERIVATIVE_AGREEMENT * (1.0 + max_abs(right_d)):
            log.warning("analytic and finite-difference derivatives differ by %.3e at %g", gap, lam)
    tol = FORM_TOL * (1.0 + max_abs(right_d))
    right = SymMatrix(k.T @ right_d @ k, even=False)
    pos, neg, zero = _inertia(right.entries, tol)
    left = None
    regular = zero == 0
    if kinked:
        left_d = path.derivative(lam, "left")
        left = SymMatrix(k.T @ left_d @ k, even=False)
        regular = regular and _inertia(left.entries, tol)[2] == 0
    return CrossingForm(right, left, pos - neg, regular)


def _analyze(path: OperatorPath, lam: float, tol_kernel: float) -> Crossing:
    snap = next((kink for kink in path.kinks() if abs(kink - lam) <= MERGE_DISTANCE), None)
    distance = MERGE_DISTANCE if snap is not None else REFINE_WIDTH
    if snap is not None:
        lam = snap
    position: Position = "start" if lam <= 0.0 else "end" if lam >= 1.0 else "interior"
    eig = path.operator(lam).eigen
    slope = np.linalg.norm(path.derivative(lam, "left" if position == "end" else "right"), 2)
    tol = max(tol_kernel, 4.0 * distance * slope)
    idx = np.flatnonzero(np.abs(eig.eigenvalues) <= tol)
    if idx.size == 0:
        raise NumericalError(f"no kernel found at crossing lambda={lam:.12g} (tolerance {tol:.2e})")
    kernel = [eig.eigenvectors[:, i] for i in idx]
    form = crossing_form(path, lam, kernel)
    ftol = FORM_TOL * (1.0 + slope)

    if position == "start":
        contribution = -_inertia(form.right.entries, ftol)[1]
        main = form.right
    elif position == "end":
        contribution = _inertia(form.right.entries, ftol)[0]
        main = form.right
    elif form.left is not None:
        contribution = _inertia(form.left.entries, ftol)[0] - _inertia(form.right.entries, ftol)[1]
        main = form.right
    else:
        contribution = form.signature
        main = form.right

    regular = form.regular
    jump = None
    if position == "interior" and MERGE_DISTANCE < lam < 1.0 - MERGE_DISTANCE:
        jump = _morse(path, lam - MERGE_DISTANCE) - _morse(path, lam + MERGE_DISTANCE)
        if regular and jump != contribution:
            log.info("crossing at %.10g: form gives %d, Morse jump %d", lam, contribution, jump)
            regular = False
    return Crossing(
        lam=lam,
        kernel_dim=len(kernel),
        form_matrix=main,
        signature=_inertia(main.entries, ftol)[0] - _inertia(main.entries, ftol)[1],
        regular=regular,
        contribution=contribution,
        position=position,
        left_form_matrix=form.left,
        morse_jump=jump,
    )


def _check_endpoints(path: OperatorPath, tol_kernel: float) -> None:
    base = path.shifted(0.0)
    singular = [tau for tau in (0.0, 1.0) if np.min(np.abs(_spectrum(base, tau))) <= tol_kernel]
    if singular:
        raise EndpointError(
            f"operator path is singular at lambda = {', '.join(f'{t:g}' for t in singular)}"
        )


def spectral_flow(
    path: OperatorPath,
    lambda_grid: int = DEFAULT_LAMBDA_GRID,
    tol_kernel: float = DEFAULT_KERNEL_TOL,
    delta_policy: Optional[DeltaPolicy] = None,
    traces: bool = False,
) -> SflResult:
    """Spectral flow of the path over [0, 1].

    The endpoints must be invertible without shift. When a crossing is
    degenerate the computation is repeated on path + delta I with a fresh
    random delta, which leaves the spectral flow unchanged for small delta.
    The path's own shift is replaced by the policy's delta; a fixed delta
    is never redrawn.
    """
    policy = delta_policy or DeltaPolicy()
    _check_endpoints(path, tol_kernel)
    rng = np.random.default_rng(policy.seed)
    delta = policy.delta or 0.0
    for attempt in range(1, policy.max_retries + 2):
        shifted = path.shifted(delta)
        scan = _scan(shifted, lambda_grid, tol_kernel)
        crossings = tuple(_analyze(shifted, lam, tol_kernel) for lam in scan.candidates)
        if all(c.regular for c in crossings):
            value = sum(c.contribution for c in crossings)
            morse_difference = scan.morse[0] - scan.morse[-1]
            interior_only = all(c.position == "interior" for c in crossings)
            if interior_only and value != morse_difference:
                raise NumericalError(
                    f"crossing sum {value} disagrees with Morse index difference {morse_difference}"
                )
            return SflResult(
                value=value,
                crossings=crossings,
                delta_used=delta,
                cutoff_n=path.spec.cutoff,
                lambda_grid=lambda_grid,
                all_regular=True,
                seed=policy.seed,
                attempts=attempt,
                morse_difference=morse_difference,
                traces=EigenTraces(scan.grid, scan.spectra) if traces else None,
            )
        irregular = [c.lam for c in crossings if not c.regular]
        if policy.delta is not None:
            raise RetriesExhaustedError(
                f"crossings at {irregular} are irregular with fixed delta={delta:g}"
            )
        log.info("irregular crossings at %s with delta=%g; retrying", irregular, delta)
        delta = float(rng.uniform(policy.low * tol_kernel, policy.high * tol_kernel))
    raise RetriesExhaustedError(
        f"crossings stayed irregular after {policy.max_retries} random shifts"
    )


def crossing_sum_positive(
    path: OperatorPath,
    lambda_grid: int = DEFAULT_LAMBDA_GRID,
    tol_kernel: float = DEFAULT_KERNEL_TOL,
    delta_policy: Optional[DeltaPolicy] = None,
) -> int:
    """Sum of kernel dimensions over crossings in (0, 1] for paths with definite forms.

    Falls back to ``spectral_flow`` as soon as one crossing form is not
    positive definite.
    """
    policy = delta_policy or DeltaPolicy()
    _check_endpoints(path, tol_kernel)
    shifted = path.shifted(policy.delta or 0.0)
    crossings = [
        _analyze(shifted, lam, tol_kernel)
        for lam in detect_crossings(shifted, lambda_grid, tol_kernel)
    ]
    counted = [c for c in crossings if c.position != "start"]
    if all(c.positive_definite for c in counted):
        return sum(c.kernel_dim for c in counted)
    log.info("crossing form not positive definite; falling back to the full spectral flow")
    return spectral_flow(path, lambda_grid, tol_kernel, policy).value


def sfl_count_bound(value: int, max_kernel_dim: int) -> int:
    """Lower bound ceil(|sfl| / max dim ker) on the number of bifurcation points."""
    if max_kernel_dim <= 0:
        return 0
    return math.ceil(abs(value) / max_kernel_dim)
