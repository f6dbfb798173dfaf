"""Report models and writers.

A report echoes the validated config and the library versions and carries
no timestamps, so re-running the echoed config reproduces it exactly.
"""

from __future__ import annotations

import csv
import io
import os
import platform
import tempfile
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
import scipy
import typer
from pydantic import BaseModel, Field

from src import __version__
from src.analysis.comparison import ComparisonCertificate
from src.analysis.monodromy import MonodromyResult, SingularPoint
from src.analysis.oracle import OracleResult
from src.analysis.sfl import Crossing, EigenTraces, SflResult, sfl_count_bound
from src.core.config import OutputConfig

Matrix = list[list[float]]


class CrossingReport(BaseModel):
    lam: float
    kernel_dim: int
    signature: int
    regular: bool
    contribution: int
    position: str
    form: Matrix
    left_form: Optional[Matrix] = None
    morse_jump: Optional[int] = None

    @classmethod
    def of(cls, c: Crossing) -> CrossingReport:
        return cls(
            lam=c.lam,
            kernel_dim=c.kernel_dim,
            signature=c.signature,
            regular=c.regular,
            contribution=c.contribution,
            position=c.position,
            form=c.form_matrix.tolist(),
            left_form=c.left_form_matrix.tolist() if c.left_form_matrix is not None else None,
            morse_jump=c.morse_jump,
        )


class SflReport(BaseModel):
    value: int
    crossings: list[CrossingReport]
    delta_used: float
    cutoff_n: int
    lambda_grid: int
    all_regular: bool
    seed: int
    attempts: int
    morse_difference: int
    max_kernel_dim: int
    count_bound: int

    @classmethod
    def of(cls, r: SflResult) -> SflReport:
        return cls(
            value=r.value,
            crossings=[CrossingReport.of(c) for c in r.crossings],
            delta_used=r.delta_used,
            cutoff_n=r.cutoff_n,
            lambda_grid=r.lambda_grid,
            all_regular=r.all_regular,
            seed=r.seed,
            attempts=r.attempts,
            morse_difference=r.morse_difference,
            max_kernel_dim=r.max_kernel_dim,
            count_bound=sfl_count_bound(r.value, r.max_kernel_dim),
        )


class SandwichReport(BaseModel):
    valid: bool
    c0_leq_c1: bool
    lower_margin: float
    middle_margin: float
    upper_margin: float
    t_grid_size: int


class CertificateReport(BaseModel):
    c0: Matrix = Field(serialization_alias="C0")
    c1: Matrix = Field(serialization_alias="C1")
    c_sources: list[str]
    eig_c0: list[float]
    eig_c1: list[float]
    sandwich: SandwichReport
    commute_j: list[bool]
    sign_change_index: Optional[int]
    integer_witness: Optional[list[int]]
    integer_criterion_applicable: bool
    per_index_counts: list[int]
    raw_bound: str
    raw_bound_value: float
    count_lower_bound: int
    endpoints_invertible: list[bool]
    finiteness: Literal["unverified", "spot-checked", "spot-check-failed"]
    singular_lambdas: list[float]
    bifurcation_guaranteed: bool
    verdict: str
    max_threshold: int
    warnings: list[str]

    @classmethod
    def of(cls, c: ComparisonCertificate) -> CertificateReport:
        if c.finitely_many_singular is None:
            finiteness = "unverified"
        else:
            finiteness = "spot-checked" if c.finitely_many_singular else "spot-check-failed"
        return cls(
            c0=c.c0.tolist(),
            c1=c.c1.tolist(),
            c_sources=list(c.c_sources),
            eig_c0=c.eig_c0.tolist(),
            eig_c1=c.eig_c1.tolist(),
            sandwich=SandwichReport(**c.sandwich.__dict__),
            commute_j=list(c.commute_j),
            sign_change_index=c.sign_change_index,
            integer_witness=list(c.integer_witness) if c.integer_witness else None,
            integer_criterion_applicable=c.integer_crossings.applicable,
            per_index_counts=list(c.per_index_counts),
            raw_bound=str(c.raw_bound),
            raw_bound_value=float(c.raw_bound),
            count_lower_bound=c.count_lower_bound,
            endpoints_invertible=list(c.endpoints_invertible),
            finiteness=finiteness,
            singular_lambdas=list(c.singular_lambdas),
            bifurcation_guaranteed=c.bifurcation_guaranteed,
            verdict=c.verdict,
            max_threshold=c.max_threshold,
            warnings=list(c.warnings),
        )


class MonodromyPointReport(BaseModel):
    lam: float
    kernel_dim: int
    det_mi: float
    sigma_min: float
    symplectic_residual: float
    matrix: Matrix

    @classmethod
    def of(cls, r: MonodromyResult) -> MonodromyPointReport:
        return cls(
            lam=r.lam,
            kernel_dim=r.kernel_dim,
            det_mi=r.det_mi,
            sigma_min=r.sigma_min,
            symplectic_residual=r.symplectic_residual,
            matrix=r.matrix.tolist(),
        )


class SingularPointReport(BaseModel):
    lam: float
    kernel_dim: int
    sigma_min: float
    resolved: bool

    @classmethod
    def of(cls, p: SingularPoint) -> SingularPointReport:
        return cls(lam=p.lam, kernel_dim=p.kernel_dim, sigma_min=p.sigma_min, resolved=p.resolved)


class MonodromyReport(BaseModel):
    steps: int
    lambda_grid: int
    tol: float
    endpoints: list[MonodromyPointReport]
    singular_points: list[SingularPointReport]
    observed_order: Optional[float] = None


class OracleCrossingReport(BaseModel):
    lam: float
    value: int
    kernel_dim: int
    contribution: int


class OracleReport(BaseModel):
    n: int
    c_start: float
    c_end: float
    sfl: int
    scalar_bound: int
    crossings: list[OracleCrossingReport]

    @classmethod
    def of(cls, r: OracleResult) -> OracleReport:
        return cls(
            n=r.n,
            c_start=r.c_start,
            c_end=r.c_end,
            sfl=r.sfl,
            scalar_bound=r.scalar_bound,
            crossings=[OracleCrossingReport(**c.__dict__) for c in r.crossings],
        )


class CrossCheck(BaseModel):
    name: str
    passed: Optional[bool]
    detail: str = ""


class Report(BaseModel):
    command: str
    verdict: str
    exit_code: int
    versions: dict[str, str]
    config: dict[str, Any]
    certificate: Optional[CertificateReport] = None
    sfl: Optional[SflReport] = None
    comparison_sfl: Optional[int] = None
    monodromy: Optional[MonodromyReport] = None
    oracle: Optional[OracleReport] = None
    cross_checks: list[CrossCheck] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True)


def versions() -> dict[str, str]:
    return {
        "hsfl": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _flatten(prefix: str, value: Any, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else key, item, rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}.{i}", item, rows)
    else:
        rows.append((prefix, "" if value is None else str(value)))


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def render(report: Report, fmt: str = "json") -> str:
    """Report as JSON text or as flat ``field,value`` CSV."""
    if fmt == "json":
        return report.to_json() + "\n"
    rows: list[tuple[str, str]] = []
    _flatten("", report.model_dump(mode="json", by_alias=True), rows)
    return _csv_text([["field", "value"], *[list(r) for r in rows]])


def traces_csv(traces: EigenTraces) -> str:
    """``lambda,eig_1..eig_D`` rows, one per grid lambda."""
    d = traces.eigenvalues.shape[1]
    header = ["lambda", *[f"eig_{i}" for i in range(1, d + 1)]]
    body = [
        [repr(float(lam)), *[repr(float(x)) for x in row]]
        for lam, row in zip(traces.lambdas, traces.eigenvalues)
    ]
    return _csv_text([header, *body])


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the target directory and rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def traces_path(output: OutputConfig) -> Path:
    if output.traces_path:
        return Path(output.traces_path)
    if output.path:
        report_path = Path(output.path)
        return report_path.with_name(f"{report_path.stem}.traces.csv")
    return Path("traces.csv")


def emit(report: Report, output: OutputConfig, traces: Optional[EigenTraces] = None) -> None:
    """Write the report (stdout or file) and, when present, the traces CSV."""
    text = render(report, output.format)
    if output.path:
        write_atomic(Path(output.path), text)
    else:
        typer.echo(text, nl=False)
    if traces is not None:
        write_atomic(traces_path(output), traces_csv(traces))
