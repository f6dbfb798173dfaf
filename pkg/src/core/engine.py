"""Run engine - turns a validated RunConfig into a Report and an exit code.

Each ``run_*`` function drives one analysis module and attaches the
cross-checks that the other engines make possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import typer

from src.analysis import monodromy as mono
from src.analysis import oracle
from src.analysis.comparison import CertifyOptions, ComparisonCertificate, certify
from src.analysis.family import MatrixFamilyPath
from src.analysis.galerkin import FourierBasisSpec, HessianPath, comparison_path, default_cutoff
from src.analysis.linalg import max_abs
from src.analysis.sfl import (
    DeltaPolicy,
    EigenTraces,
    SflResult,
    crossing_sum_positive,
    spectral_flow,
)
from src.core.collectors import collect_report
from src.core.config import RunConfig
from src.core.console import err_console, error_panel, warning_panel
from src.core.errors import (
    EXIT_ENDPOINT,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EndpointError,
    HsflError,
    InputError,
    NumericalError,
)
from src.core.logger import get_logger
from src.core.report import (
    CertificateReport,
    CrossCheck,
    MonodromyPointReport,
    MonodromyReport,
    OracleReport,
    Report,
    SflReport,
    SingularPointReport,
    emit,
    versions,
)

AGREEMENT_TOL = 2e-4
ORACLE_LAMBDA_TOL = 1e-6
ORACLE_MONODROMY_TOL = 1e-8
SYMPLECTIC_TOL = 1e-8

VERDICT_EXIT = {
    "guaranteed": EXIT_OK,
    "inconclusive": EXIT_INCONCLUSIVE,
    "endpoint-violated": EXIT_ENDPOINT,
}


@dataclass
class RunOutcome:
    report: Report
    traces: Optional[EigenTraces] = None

    @property
    def exit_code(self) -> int:
        return self.report.exit_code


def _report(cfg: RunConfig, command: str, verdict: str, exit_code: int, **sections: Any) -> Report:
    return Report(
        command=command,
        verdict=verdict,
        exit_code=exit_code,
        versions=versions(),
        config=cfg.echo(),
        **sections,
    )


def _basis(cfg: RunConfig, fam: MatrixFamilyPath, max_threshold: int = 0) -> FourierBasisSpec:
    cutoff = cfg.galerkin.cutoff or default_cutoff(fam.max_freq, max_threshold)
    return FourierBasisSpec(cfg.n, cutoff)


def _delta_policy(cfg: RunConfig) -> DeltaPolicy:
    return DeltaPolicy(delta=cfg.delta, seed=cfg.sfl.seed, max_retries=cfg.sfl.max_retries)


def _hessian_sfl(cfg: RunConfig, fam: MatrixFamilyPath, spec: FourierBasisSpec) -> SflResult:
    path = HessianPath(spec, fam, 0.0, cfg.galerkin.quad_points)
    return spectral_flow(
        path,
        cfg.sfl.lambda_grid,
        cfg.sfl.tol_kernel,
        _delta_policy(cfg),
        traces=cfg.output.traces,
    )


def _morse_check(result: SflResult) -> CrossCheck:
    return CrossCheck(
        name="crossing sum equals Morse index difference",
        passed=result.value == result.morse_difference,
        detail=f"sfl={result.value}, morse difference={result.morse_difference}",
    )


def _agreement(result: SflResult, singular: list[float]) -> CrossCheck:
    """Galerkin crossings and monodromy singular lambdas match within AGREEMENT_TOL."""
    galerkin = sorted(c.lam for c in result.crossings if c.position == "interior")
    matched = len(galerkin) == len(singular) and all(
        abs(a - b) <= AGREEMENT_TOL for a, b in zip(galerkin, sorted(singular))
    )
    return CrossCheck(
        name="Galerkin crossings agree with monodromy scan",
        passed=matched,
        detail=f"galerkin={galerkin}, monodromy={sorted(singular)}",
    )


def run_sfl(cfg: RunConfig) -> RunOutcome:
    """Spectral flow of the Hessian path; exit 0 on success."""
    fam = cfg.to_family()
    result = _hessian_sfl(cfg, fam, _basis(cfg, fam))
    report = _report(
        cfg,
        "sfl",
        "computed",
        EXIT_OK,
        sfl=SflReport.of(result),
        cross_checks=[_morse_check(result)],
    )
    return RunOutcome(report, result.traces)


def run_monodromy(cfg: RunConfig) -> RunOutcome:
    """Monodromy at the endpoints plus a lambda-scan for singular points."""
    fam = cfg.to_family()
    m = cfg.monodromy
    endpoints = [mono.integrate_fundamental(fam, lam, m.steps, m.tol) for lam in (0.0, 1.0)]
    points = mono.scan_lambda(fam, m.lambda_grid, m.steps, m.tol)
    section = MonodromyReport(
        steps=m.steps,
        lambda_grid=m.lambda_grid,
        tol=m.tol,
        endpoints=[MonodromyPointReport.of(r) for r in endpoints],
        singular_points=[SingularPointReport.of(p) for p in points],
        observed_order=mono.observed_order(fam, 0.0),
    )
    warnings = [
        f"unresolved singular point near lambda={p.lam:.8g}"
        for p in points
        if not p.resolved
    ]
    # growing solutions scale the residual by ||M||^2
    residual = max(
        r.symplectic_residual / (1.0 + max_abs(r.matrix)) ** 2 for r in endpoints
    )
    checks = [
        CrossCheck(
            name="monodromy is symplectic",
            passed=residual <= SYMPLECTIC_TOL,
            detail=f"max relative residual {residual:.3e}",
        )
    ]
    report = _report(
        cfg,
        "monodromy",
        "computed",
        EXIT_OK,
        monodromy=section,
        cross_checks=checks,
        warnings=warnings,
    )
    return RunOutcome(report)


def _certificate(cfg: RunConfig, fam: MatrixFamilyPath) -> ComparisonCertificate:
    options = CertifyOptions(
        c0=cfg.comparison_source(0),
        c1=cfg.comparison_source(1),
        t_grid_size=cfg.comparison.t_grid,
        steps=cfg.monodromy.steps,
        tol_kernel=cfg.monodromy.tol,
        scan=cfg.comparison.scan,
        scan_lambda_grid=cfg.monodromy.lambda_grid,
    )
    return certify(fam, options)


@dataclass
class _FlowChecks:
    sfl: Optional[SflResult] = None
    comparison_value: Optional[int] = None
    checks: list[CrossCheck] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _comparison_flow(
    cfg: RunConfig, fam: MatrixFamilyPath, spec: FourierBasisSpec, cert: ComparisonCertificate
) -> Optional[int]:
    path = comparison_path(spec, fam, cert.c0, cert.c1, 0.0, cfg.galerkin.quad_points)
    return crossing_sum_positive(path, cfg.sfl.lambda_grid, cfg.sfl.tol_kernel, _delta_policy(cfg))


def _flow_checks(cfg: RunConfig, fam: MatrixFamilyPath, cert: ComparisonCertificate) -> _FlowChecks:
    """Galerkin flows of L and of the comparison path M, compared with the certificate."""
    out = _FlowChecks()
    spec = _basis(cfg, fam, cert.max_threshold)
    truncated = spec.cutoff < cert.max_threshold
    if truncated:
        out.warnings.append(
            f"cutoff N={spec.cutoff} is below the largest counted threshold "
            f"{cert.max_threshold}; comparison-path flow may be truncated"
        )
    try:
        out.sfl = _hessian_sfl(cfg, fam, spec)
    except (NumericalError, EndpointError) as e:
        out.warnings.append(f"Galerkin spectral flow unavailable: {e}")
        return out
    value = out.sfl.value
    applicable = cert.integer_crossings.applicable
    bound = cert.raw_bound * fam.dim
    out.checks.append(_morse_check(out.sfl))
    out.checks.append(
        CrossCheck(
            name="sfl(L) >= 2n * raw bound",
            passed=value >= bound if applicable else None,
            detail=f"sfl={value}, 2n*raw={bound}",
        )
    )
    if cert.sandwich_valid:
        try:
            out.comparison_value = _comparison_flow(cfg, fam, spec, cert)
        except (NumericalError, EndpointError) as e:
            out.warnings.append(f"comparison-path spectral flow unavailable: {e}")
    if out.comparison_value is not None:
        m_value = out.comparison_value
        out.checks.append(
            CrossCheck(
                name="sfl(L) >= sfl(M)",
                passed=value >= m_value,
                detail=f"sfl(L)={value}, sfl(M)={m_value}",
            )
        )
        counts = sum(cert.per_index_counts)
        out.checks.append(
            CrossCheck(
                name="sfl(M) equals the per-index integer counts",
                passed=m_value == counts if applicable and not truncated else None,
                detail=f"sfl(M)={m_value}, counts={counts}",
            )
        )
    if cfg.comparison.scan:
        out.checks.append(_agreement(out.sfl, list(cert.singular_lambdas)))
    return out


def run_certify(cfg: RunConfig) -> RunOutcome:
    """Comparison certificate, with the Galerkin spectral flows as cross-checks.

    Exit 0 when a bifurcation is guaranteed, 3 when inconclusive and 2 when
    an endpoint is singular.
    """
    fam = cfg.to_family()
    cert = _certificate(cfg, fam)
    flows = _FlowChecks() if cert.verdict == "endpoint-violated" else _flow_checks(cfg, fam, cert)
    report = _report(
        cfg,
        "certify",
        cert.verdict,
        VERDICT_EXIT[cert.verdict],
        certificate=CertificateReport.of(cert),
        sfl=SflReport.of(flows.sfl) if flows.sfl is not None else None,
        comparison_sfl=flows.comparison_value,
        cross_checks=flows.checks,
        warnings=[*cert.warnings, *flows.warnings],
    )
    return RunOutcome(report, flows.sfl.traces if flows.sfl is not None else None)


def run_oracle(cfg: RunConfig) -> RunOutcome:
    """Closed-form answer for a scalar family, checked against both numerical engines."""
    fam = cfg.to_family()
    exact = oracle.solve(fam)
    threshold = max((abs(c.value) for c in exact.crossings), default=0)
    spec = _basis(cfg, fam, threshold)
    result = _hessian_sfl(cfg, fam, spec)
    numeric = sorted(c.lam for c in result.crossings)
    closed = sorted(exact.crossing_lambdas)
    checks = [
        CrossCheck(
            name="Galerkin spectral flow equals closed form",
            passed=result.value == exact.sfl,
            detail=f"galerkin={result.value}, closed form={exact.sfl}",
        ),
        CrossCheck(
            name="Galerkin crossings equal closed form",
            passed=len(numeric) == len(closed)
            and all(abs(a - b) <= ORACLE_LAMBDA_TOL for a, b in zip(numeric, closed)),
            detail=f"galerkin={numeric}, closed form={closed}",
        ),
    ]
    m = cfg.monodromy
    errors = [
        max_abs(mono.fundamental_matrix(fam.polynomial_at(lam), m.steps) - expected)
        for lam, expected in ((0.0, exact.monodromy_start), (1.0, exact.monodromy_end))
    ]
    checks.append(
        CrossCheck(
            name="RK4 monodromy equals exp(2 pi c J)",
            passed=bool(np.max(errors) <= ORACLE_MONODROMY_TOL),
            detail=f"max deviation {max(errors):.3e}",
        )
    )
    return RunOutcome(
        _report(
            cfg,
            "oracle",
            "computed",
            EXIT_OK,
            oracle=OracleReport.of(exact),
            sfl=SflReport.of(result),
            cross_checks=checks,
        ),
        result.traces,
    )


def execute(
    command: str,
    runner: Callable[[RunConfig], RunOutcome],
    config_path: Path,
    overrides: dict[str, Any],
) -> None:
    """Load, override, run, emit; errors become an error panel and their exit code."""
    history = get_logger()
    try:
        cfg = RunConfig.load(config_path).with_overrides(overrides)
        outcome = runner(cfg)
        emit(outcome.report, cfg.output, outcome.traces if cfg.output.traces else None)
    except OSError as e:
        err: HsflError = InputError(f"cannot write output: {e}")
        error_panel(err.title, str(err))
        history.log(command, str(config_path), err.exit_code, "error", str(err))
        raise typer.Exit(code=err.exit_code) from e
    except HsflError as e:
        error_panel(e.title, str(e))
        history.log(command, str(config_path), e.exit_code, "error", str(e))
        raise typer.Exit(code=e.exit_code) from e

    report = outcome.report
    for panel in collect_report(report):
        err_console.print(panel)
    for message in report.warnings:
        warning_panel("Warning", message)
    history.log(command, str(config_path), report.exit_code, report.verdict)
    if report.exit_code != EXIT_OK:
        raise typer.Exit(code=report.exit_code)
