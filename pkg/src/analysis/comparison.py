"""Comparison certificates: Loewner sandwich A_0(t) <= C_0 <= C_1 <= A_1(t) and the
eigenvalue criteria it feeds.

Given constant symmetric C_0 <= C_1 squeezed between the endpoint coefficients,
a bifurcation point exists when some eigenvalue index changes sign between
C_0 and C_1; when both C's commute with J, every integer k with
mu_i(C_0) < k <= mu_i(C_1) contributes, and the count sum / 2n bounds the
number of bifurcation points from below.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Literal, Optional, Union

import numpy as np

from src.analysis.family import (
    MatrixFamilyPath,
    resolve_t_grid_size,
    spectral_bounds,
    t_grid,
)
from src.analysis.linalg import (
    DEFAULT_TOL,
    INTEGER_SNAP_TOL,
    SymMatrix,
    commutes_with_j,
    count_integers_half_open,
    eigvals_sym,
    integers_half_open,
    loewner_leq,
    morse_index,
    snap_integer,
)
from src.analysis.monodromy import (
    DEFAULT_KERNEL_TOL,
    DEFAULT_STEPS,
    endpoint_invertibility,
    scan_lambda,
)
from src.core.errors import DimensionError, InputError, InternalConsistencyError

log = logging.getLogger(__name__)

SynthesisMode = Literal["scalar", "shifted_mean"]
CSource = Union[SymMatrix, Literal["auto-scalar", "auto-shifted-mean"]]
Verdict = Literal["guaranteed", "inconclusive", "endpoint-violated"]

AUTO_MODES: dict[str, SynthesisMode] = {
    "auto-scalar": "scalar",
    "auto-shifted-mean": "shifted_mean",
}


@dataclass(frozen=True)
class SandwichCheck:
    """Worst Loewner margins (smallest eigenvalue of each difference) on the t-grid."""

    valid: bool
    c0_leq_c1: bool
    lower_margin: float
    middle_margin: float
    upper_margin: float
    t_grid_size: int


@dataclass(frozen=True)
class IntegerCrossingCheck:
    applicable: bool
    witness: Optional[tuple[int, int]]
    per_index_counts: tuple[int, ...]
    raw_bound: Fraction
    lower_bound: int


@dataclass(frozen=True)
class ComparisonCertificate:
    c0: SymMatrix
    c1: SymMatrix
    eig_c0: np.ndarray
    eig_c1: np.ndarray
    sandwich: SandwichCheck
    commute_j: tuple[bool, bool]
    sign_change_index: Optional[int]
    integer_crossings: IntegerCrossingCheck
    endpoints_invertible: tuple[bool, bool]
    c_sources: tuple[str, str] = ("matrix", "matrix")
    finitely_many_singular: Optional[bool] = None
    singular_lambdas: tuple[float, ...] = ()
    warnings: list[str] = field(default_factory=list)

    @property
    def sandwich_valid(self) -> bool:
        return self.sandwich.valid

    @property
    def c0_leq_c1(self) -> bool:
        return self.sandwich.c0_leq_c1

    @property
    def integer_witness(self) -> Optional[tuple[int, int]]:
        return self.integer_crossings.witness if self.integer_crossings.applicable else None

    @property
    def per_index_counts(self) -> tuple[int, ...]:
        return self.integer_crossings.per_index_counts

    @property
    def raw_bound(self) -> Fraction:
        return self.integer_crossings.raw_bound

    @property
    def bifurcation_guaranteed(self) -> bool:
        return (
            self.sandwich_valid
            and all(self.endpoints_invertible)
            and (self.sign_change_index is not None or self.integer_witness is not None)
        )

    @property
    def count_lower_bound(self) -> int:
        """At least one bifurcation point when guaranteed, more when the count criterion applies."""
        if not self.bifurcation_guaranteed:
            return 0
        check = self.integer_crossings
        return max(check.lower_bound if check.applicable else 0, 1)

    @property
    def verdict(self) -> Verdict:
        if not all(self.endpoints_invertible):
            return "endpoint-violated"
        return "guaranteed" if self.bifurcation_guaranteed else "inconclusive"

    @property
    def max_threshold(self) -> int:
        """Largest |k| among the integers counted; the Galerkin cutoff should reach it."""
        ks = [
            abs(k)
            for a, b in zip(self.eig_c0, self.eig_c1)
            if a <= b
            for k in integers_half_open(float(a), float(b))
        ]
        return max(ks, default=0)


def _snap_zero(values: np.ndarray, tol: float = INTEGER_SNAP_TOL) -> np.ndarray:
    return np.where(np.abs(values) <= tol, 0.0, values)


def _min_eig(stack: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(stack)[..., 0].min())


def validate_sandwich(
    fam: MatrixFamilyPath,
    c0: SymMatrix,
    c1: SymMatrix,
    t_grid_size: Optional[int] = None,
    tol: float = DEFAULT_TOL,
) -> SandwichCheck:
    """Check A_0(t) <= C_0 <= C_1 <= A_1(t) on a uniform t-grid.

    Failure is a valid outcome; only mismatched dimensions and t-grids
    coarser than 4(F+1) points raise.
    """
    if c0.dim != fam.dim or c1.dim != fam.dim:
        raise DimensionError(
            f"comparison matrices must be {fam.dim}x{fam.dim}, got {c0.dim} and {c1.dim}"
        )
    size = resolve_t_grid_size(t_grid_size, fam.max_freq)
    ts = t_grid(size)
    a0 = fam.polynomial_at(0.0).evaluate_many(ts)
    a1 = fam.polynomial_at(1.0).evaluate_many(ts)
    lower = _min_eig(c0.entries[None] - a0)
    middle = _min_eig(c1.entries - c0.entries)
    upper = _min_eig(a1 - c1.entries[None])
    scale = 1.0 + max(c0.norm(), c1.norm())
    ok = [m >= -tol * scale for m in (lower, middle, upper)]
    return SandwichCheck(
        valid=all(ok),
        c0_leq_c1=ok[1],
        lower_margin=lower,
        middle_margin=middle,
        upper_margin=upper,
        t_grid_size=size,
    )


def _check_weyl(c0: SymMatrix, c1: SymMatrix, e0: np.ndarray, e1: np.ndarray) -> bool:
    """Eigenvalues are monotone under the Loewner order; assert it when C_0 <= C_1."""
    if not loewner_leq(c0, c1):
        return False
    slack = DEFAULT_TOL * (1.0 + max(c0.norm(), c1.norm()))
    if np.any(e0 > e1 + slack):
        raise InternalConsistencyError("eigenvalues of C0 exceed those of C1 although C0 <= C1")
    return True


def sign_change_check(c0: SymMatrix, c1: SymMatrix) -> Optional[int]:
    """Smallest 1-based i with mu_i(C_0) < 0 <= mu_i(C_1), or None.

    When C_0 <= C_1 this is the same as the Morse indices of C_0 and C_1
    differing; both are computed and must agree.
    """
    if c0.dim != c1.dim:
        raise DimensionError(f"dimension mismatch: {c0.dim} vs {c1.dim}")
    e0 = _snap_zero(eigvals_sym(c0))
    e1 = _snap_zero(eigvals_sym(c1))
    hits = np.flatnonzero((e0 < 0.0) & (e1 >= 0.0))
    index = int(hits[0]) + 1 if hits.size else None
    if _check_weyl(c0, c1, e0, e1):
        morse_differs = morse_index(c0, INTEGER_SNAP_TOL) != morse_index(c1, INTEGER_SNAP_TOL)
        if morse_differs != (index is not None):
            raise InternalConsistencyError(
                f"sign-change index {index} disagrees with Morse indices "
                f"{morse_index(c0, INTEGER_SNAP_TOL)} and {morse_index(c1, INTEGER_SNAP_TOL)}"
            )
    return index


def integer_crossing_check(
    c0: SymMatrix, c1: SymMatrix, tol: float = DEFAULT_TOL
) -> IntegerCrossingCheck:
    """Integer-crossing counts mu_i(C_0) < k <= mu_i(C_1) per eigenvalue index.

    Counts are always computed; the witness and bound only apply when both
    matrices commute with J.
    """
    if c0.dim != c1.dim:
        raise DimensionError(f"dimension mismatch: {c0.dim} vs {c1.dim}")
    e0 = eigvals_sym(c0)
    e1 = eigvals_sym(c1)
    _check_weyl(c0, c1, e0, e1)
    counts = tuple(
        count_integers_half_open(float(a), float(b)) if snap_integer(a) <= snap_integer(b) else 0
        for a, b in zip(e0, e1)
    )
    witness = None
    for i, count in enumerate(counts):
        if count:
            witness = (i + 1, int(math.floor(snap_integer(float(e0[i])))) + 1)
            break
    applicable = commutes_with_j(c0, tol) and commutes_with_j(c1, tol)
    raw = Fraction(sum(counts), c0.dim)
    return IntegerCrossingCheck(
        applicable=applicable,
        witness=witness,
        per_index_counts=counts,
        raw_bound=raw,
        lower_bound=math.ceil(raw) if applicable else 0,
    )


def synthesize_c(
    fam: MatrixFamilyPath,
    side: Literal[0, 1],
    mode: SynthesisMode = "scalar",
    t_grid_size: Optional[int] = None,
) -> SymMatrix:
    """Build C_0 (side 0) or C_1 (side 1) from the endpoint coefficients.

    ``scalar`` gives beta_0 I or alpha_1 I, which always commute with J.
    ``shifted_mean`` gives Abar + r I or Abar - r I with the smallest grid r
    that keeps the sandwich side valid; it is tighter but may not commute
    with J.
    """
    if side not in (0, 1):
        raise InputError(f"side must be 0 or 1, got {side}")
    lam = float(side)
    if mode == "scalar":
        alpha, beta = spectral_bounds(fam, lam, t_grid_size)
        return SymMatrix.scalar(beta if side == 0 else alpha, fam.dim)
    if mode != "shifted_mean":
        raise InputError(f"unknown synthesis mode {mode!r}")
    poly = fam.polynomial_at(lam)
    mean = poly.mean()
    size = resolve_t_grid_size(t_grid_size, poly.max_freq)
    samples = poly.evaluate_many(t_grid(size))
    diff = samples - mean.entries[None] if side == 0 else mean.entries[None] - samples
    r = max(float(np.linalg.eigvalsh(diff)[:, -1].max()), 0.0)
    shift = SymMatrix.scalar(r, fam.dim)
    return mean + shift if side == 0 else mean - shift


def _resolve(
    fam: MatrixFamilyPath, source: CSource, side: Literal[0, 1], t_grid_size: Optional[int]
) -> tuple[SymMatrix, str]:
    if isinstance(source, SymMatrix):
        return source, "matrix"
    if source not in AUTO_MODES:
        raise InputError(f"unknown comparison matrix source {source!r}")
    return synthesize_c(fam, side, AUTO_MODES[source], t_grid_size), source


def build_certificate(
    fam: MatrixFamilyPath,
    c0: SymMatrix,
    c1: SymMatrix,
    endpoints_invertible: tuple[bool, bool],
    t_grid_size: Optional[int] = None,
    c_sources: tuple[str, str] = ("matrix", "matrix"),
) -> ComparisonCertificate:
    """Assemble a certificate from given C's and an endpoint verdict."""
    sandwich = validate_sandwich(fam, c0, c1, t_grid_size)
    warnings = []
    if not sandwich.valid:
        warnings.append(
            "Loewner sandwich fails on the t-grid "
            f"(margins {sandwich.lower_margin:.3e}, {sandwich.middle_margin:.3e}, "
            f"{sandwich.upper_margin:.3e})"
        )
    commute = (commutes_with_j(c0), commutes_with_j(c1))
    ii = integer_crossing_check(c0, c1)
    if not ii.applicable and ii.witness is not None:
        warnings.append("integer-crossing counts need C0 and C1 to commute with J; count not used")
    return ComparisonCertificate(
        c0=c0,
        c1=c1,
        eig_c0=eigvals_sym(c0),
        eig_c1=eigvals_sym(c1),
        sandwich=sandwich,
        commute_j=commute,
        sign_change_index=sign_change_check(c0, c1),
        integer_crossings=ii,
        endpoints_invertible=endpoints_invertible,
        c_sources=c_sources,
        warnings=warnings,
    )


def scalar_corollary(
    fam: MatrixFamilyPath,
    t_grid_size: Optional[int] = None,
    endpoints_invertible: Optional[tuple[bool, bool]] = None,
    steps: int = DEFAULT_STEPS,
) -> ComparisonCertificate:
    """Certificate with C_0 = beta_0 I and C_1 = alpha_1 I.

    Its bound must equal the number of integers in (beta_0, alpha_1]. When
    beta_0 > alpha_1 the certificate carries an invalid sandwich.
    """
    c0 = synthesize_c(fam, 0, "scalar", t_grid_size)
    c1 = synthesize_c(fam, 1, "scalar", t_grid_size)
    if endpoints_invertible is None:
        endpoints_invertible = endpoint_invertibility(fam, steps)
    cert = build_certificate(
        fam, c0, c1, endpoints_invertible, t_grid_size, ("auto-scalar", "auto-scalar")
    )
    beta0 = float(c0.entries[0, 0])
    alpha1 = float(c1.entries[0, 0])
    if beta0 <= alpha1:
        expected = count_integers_half_open(beta0, alpha1)
        if cert.integer_crossings.lower_bound != expected:
            raise InternalConsistencyError(
                f"scalar bound {cert.integer_crossings.lower_bound} differs from "
                f"|({beta0}, {alpha1}] cap Z| = {expected}"
            )
    return cert


@dataclass(frozen=True)
class CertifyOptions:
    c0: CSource = "auto-scalar"
    c1: CSource = "auto-scalar"
    t_grid_size: Optional[int] = None
    steps: int = DEFAULT_STEPS
    tol_kernel: float = DEFAULT_KERNEL_TOL
    scan: bool = False
    scan_lambda_grid: int = 64


def certify(
    fam: MatrixFamilyPath, options: Optional[CertifyOptions] = None
) -> ComparisonCertificate:
    """Full certificate: sandwich, both criteria and the monodromy endpoint check.

    With ``options.scan`` a monodromy lambda-scan spot-checks that singular
    lambdas are isolated; a finite grid cannot prove finiteness, so the flag
    stays a spot check.
    """
    opts = options or CertifyOptions()
    c0, src0 = _resolve(fam, opts.c0, 0, opts.t_grid_size)
    c1, src1 = _resolve(fam, opts.c1, 1, opts.t_grid_size)
    endpoints = endpoint_invertibility(fam, opts.steps, opts.tol_kernel)
    if not all(endpoints):
        log.warning("endpoint assumption fails: kernel trivial at (0, 1) = %s", endpoints)
    cert = build_certificate(fam, c0, c1, endpoints, opts.t_grid_size, (src0, src1))
    if not opts.scan:
        return cert
    points = scan_lambda(fam, opts.scan_lambda_grid, opts.steps, opts.tol_kernel)
    finite = all(p.resolved for p in points)
    warnings = list(cert.warnings)
    if not finite:
        warnings.append("monodromy scan left unresolved singular points")
    return replace(
        cert,
        finitely_many_singular=finite,
        singular_lambdas=tuple(p.lam for p in points if p.kernel_dim > 0),
        warnings=warnings,
    )
