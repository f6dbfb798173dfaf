"""System command group - settings and environment info."""

import platform

import numpy as np
import scipy
import typer
from rich.panel import Panel
from rich.table import Table

from src.core.config import get_config
from src.core.console import console

system_app = typer.Typer(help="System: settings and environment info")


@system_app.command()
def config():
    """Show current settings."""
    cfg = get_config()

    table = Table(title="hsfl Configuration")
    table.add_column("Setting", style="cyan")
    table.add_column("Value")

    table.add_row("Max Workers", str(cfg.max_workers) if cfg.max_workers else "[dim]auto[/dim]")
    table.add_row("Data Directory", str(cfg.data_path))
    table.add_row("Run History", "on" if cfg.log_runs else "[dim]off[/dim]")

    console.print(table)


@system_app.command()
def info():
    """Show hsfl version and numerical stack."""
    from src import __version__

    console.print(Panel(
        f"[bold green]hsfl[/bold green] v{__version__}\n"
        "[dim]Spectral-flow bifurcation detection for Hamiltonian systems[/dim]\n\n"
        f"[bold]Python:[/bold] {platform.python_version()}\n"
        f"[bold]numpy:[/bold]  {np.__version__}\n"
        f"[bold]scipy:[/bold]  {scipy.__version__}\n\n"
        "[bold]Commands:[/bold]\n"
        "  certify    - Comparison certificate and bifurcation count\n"
        "  sfl        - Spectral flow of the Galerkin Hessian path\n"
        "  monodromy  - Lambda-scan of the linearized system\n"
        "  oracle     - Closed form for scalar families",
        title="About",
        border_style="blue",
    ))
