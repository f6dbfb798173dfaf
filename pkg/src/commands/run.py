"""Analysis commands - certify, sfl, monodromy, oracle.

Every command takes one JSON run config; flags override its scalar options.
The report goes to stdout (or --output), panels and diagnostics to stderr.
Exit codes: 0 success or bifurcation guaranteed, 1 invalid input, 2 endpoint
assumption violated, 3 inconclusive, 4 numerical failure.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import typer

from src.core.engine import execute, run_certify, run_monodromy, run_oracle, run_sfl


def _output_overrides(
    fmt: Optional[str], output: Optional[Path], traces: Optional[bool]
) -> dict[str, object]:
    return {
        "output.format": fmt,
        "output.path": str(output) if output else None,
        "output.traces": traces,
    }


def certify_cmd(
    config: Path = typer.Argument(..., help="Run config (JSON)"),
    cutoff: Optional[int] = typer.Option(None, "--cutoff", "-N", help="Galerkin cutoff N"),
    quad_points: Optional[int] = typer.Option(None, "--quad-points", help="Quadrature nodes"),
    lambda_grid: Optional[int] = typer.Option(None, "--lambda-grid", help="sfl lambda-grid"),
    delta: Optional[str] = typer.Option(None, "--delta", help="Shift: number or 'auto'"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for random shifts"),
    steps: Optional[int] = typer.Option(None, "--steps", help="RK4 steps per period"),
    scan: Optional[bool] = typer.Option(None, "--scan/--no-scan", help="Monodromy spot-check"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="Report format: json, csv"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report file"),
    traces: Optional[bool] = typer.Option(None, "--traces/--no-traces", help="Write traces CSV"),
) -> None:
    """Check the comparison certificate: is a bifurcation guaranteed, and how many?"""
    overrides = {
        "galerkin.cutoff": cutoff,
        "galerkin.quad_points": quad_points,
        "sfl.lambda_grid": lambda_grid,
        "sfl.delta": delta,
        "sfl.seed": seed,
        "monodromy.steps": steps,
        "comparison.scan": scan,
        **_output_overrides(fmt, output, traces),
    }
    execute("certify", run_certify, config, overrides)


def sfl_cmd(
    config: Path = typer.Argument(..., help="Run config (JSON)"),
    cutoff: Optional[int] = typer.Option(None, "--cutoff", "-N", help="Galerkin cutoff N"),
    quad_points: Optional[int] = typer.Option(None, "--quad-points", help="Quadrature nodes"),
    lambda_grid: Optional[int] = typer.Option(None, "--lambda-grid", help="Lambda-grid size"),
    delta: Optional[str] = typer.Option(None, "--delta", help="Shift: number or 'auto'"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for random shifts"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="Report format: json, csv"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report file"),
    traces: Optional[bool] = typer.Option(None, "--traces/--no-traces", help="Write traces CSV"),
) -> None:
    """Spectral flow of the Galerkin-truncated Hessian path."""
    overrides = {
        "galerkin.cutoff": cutoff,
        "galerkin.quad_points": quad_points,
        "sfl.lambda_grid": lambda_grid,
        "sfl.delta": delta,
        "sfl.seed": seed,
        **_output_overrides(fmt, output, traces),
    }
    execute("sfl", run_sfl, config, overrides)


def monodromy_cmd(
    config: Path = typer.Argument(..., help="Run config (JSON)"),
    steps: Optional[int] = typer.Option(None, "--steps", help="RK4 steps per period"),
    lambda_grid: Optional[int] = typer.Option(None, "--lambda-grid", help="Lambda-grid size"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="Report format: json, csv"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report file"),
) -> None:
    """Scan lambda for nontrivial periodic solutions of the linearized system."""
    overrides = {
        "monodromy.steps": steps,
        "monodromy.lambda_grid": lambda_grid,
        **_output_overrides(fmt, output, None),
    }
    execute("monodromy", run_monodromy, config, overrides)


def oracle_cmd(
    config: Path = typer.Argument(..., help="Run config (JSON)"),
    cutoff: Optional[int] = typer.Option(None, "--cutoff", "-N", help="Galerkin cutoff N"),
    steps: Optional[int] = typer.Option(None, "--steps", help="RK4 steps per period"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="Report format: json, csv"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report file"),
    traces: Optional[bool] = typer.Option(None, "--traces/--no-traces", help="Write traces CSV"),
) -> None:
    """Closed-form results for a scalar family c(lambda) I, checked against both engines."""
    overrides = {
        "galerkin.cutoff": cutoff,
        "monodromy.steps": steps,
        **_output_overrides(fmt, output, traces),
    }
    execute("oracle", run_oracle, config, overrides)
