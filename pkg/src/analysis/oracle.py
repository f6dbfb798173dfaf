"""Closed-form answers for scalar families A_lambda(t) = c(lambda) I.

The linearized system has monodromy exp(2 pi c J), so nontrivial periodic
solutions exist exactly when c is an integer, with a 2n-dimensional kernel.
Along a piecewise-linear c the flow through each such lambda is 2n times the
sign of the slope, and the total is 2n (floor c(1) - floor c(0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.analysis.family import MatrixFamilyPath
from src.analysis.linalg import count_integers_half_open, max_abs, snap_integer
from src.analysis.monodromy import closed_form_monodromy
from src.core.errors import EndpointError, InputError, InternalConsistencyError


@dataclass(frozen=True)
class OracleCrossing:
    lam: float
    value: int
    kernel_dim: int
    contribution: int


@dataclass(frozen=True)
class OracleResult:
    n: int
    c_start: float
    c_end: float
    crossings: tuple[OracleCrossing, ...]
    sfl: int
    scalar_bound: int
    monodromy_start: np.ndarray
    monodromy_end: np.ndarray

    @property
    def crossing_lambdas(self) -> tuple[float, ...]:
        return tuple(c.lam for c in self.crossings)


def scalar_values(fam: MatrixFamilyPath) -> list[tuple[float, float]]:
    """(lambda, c) at every knot; InputError unless each knot is a constant c I."""
    out = []
    for knot in fam.knots:
        poly = knot.poly
        c = float(poly.cos_coeffs[0][0, 0])
        if not poly.is_constant() or max_abs(poly.cos_coeffs[0] - c * np.eye(poly.dim)) > 0.0:
            raise InputError(
                f"closed-form oracle needs a constant scalar family c(lambda) I; "
                f"knot lambda={knot.lam} is not of that form"
            )
        out.append((knot.lam, c))
    return out


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def solve(fam: MatrixFamilyPath) -> OracleResult:
    """Crossings, kernel dimensions and spectral flow of a scalar family."""
    values = scalar_values(fam)
    dim = 2 * fam.n
    c_start, c_end = values[0][1], values[-1][1]
    for lam, c in ((0.0, c_start), (1.0, c_end)):
        if snap_integer(c) == round(c):
            raise EndpointError(f"c({lam:g}) = {c:g} is an integer; the endpoint is singular")

    slopes = [(c1 - c0) / (l1 - l0) for (l0, c0), (l1, c1) in zip(values, values[1:])]
    crossings: list[OracleCrossing] = []
    for (_, c0), slope in zip(values, slopes):
        if slope == 0.0 and snap_integer(c0) == round(c0):
            raise InputError(f"c is the integer {c0:g} on a whole lambda-interval")
    for (l0, c0), (l1, c1), slope in zip(values, values[1:], slopes):
        lo, hi = sorted((snap_integer(c0), snap_integer(c1)))
        for m in range(math.floor(lo) + 1, math.ceil(hi)):
            lam = l0 + (m - c0) / slope
            crossings.append(OracleCrossing(float(lam), m, dim, dim * _sign(slope)))
    for j in range(1, len(values) - 1):
        lam, c = values[j]
        if snap_integer(c) == round(c):
            left, right = slopes[j - 1], slopes[j]
            contribution = dim * (int(left > 0) - int(right < 0))
            crossings.append(OracleCrossing(lam, round(c), dim, contribution))

    total = dim * (math.floor(c_end) - math.floor(c_start))
    if sum(c.contribution for c in crossings) != total:
        raise InternalConsistencyError(
            f"crossing contributions sum to {sum(c.contribution for c in crossings)}, "
            f"expected {total}"
        )
    return OracleResult(
        n=fam.n,
        c_start=c_start,
        c_end=c_end,
        crossings=tuple(sorted(crossings, key=lambda c: c.lam)),
        sfl=total,
        scalar_bound=count_integers_half_open(c_start, c_end) if c_start <= c_end else 0,
        monodromy_start=closed_form_monodromy(c_start, fam.n),
        monodromy_end=closed_form_monodromy(c_end, fam.n),
    )
