"""hsfl - bifurcation detection for periodic solutions of Hamiltonian systems.

Computes the spectral flow of Fourier-Galerkin truncations of the Hessian
path, checks Loewner comparison certificates and cross-validates both by
monodromy integration of the linearized system.
"""

import typer
from rich.panel import Panel
from rich.text import Text

from src.commands.init_cmd import init_cmd
from src.commands.logs import logs_app
from src.commands.run import certify_cmd, monodromy_cmd, oracle_cmd, sfl_cmd
from src.commands.system import system_app
from src.core.console import console
from src.core.logger import setup_logging

app = typer.Typer(
    name="hsfl",
    help="hsfl: spectral-flow bifurcation detection for Hamiltonian systems",
    add_completion=False,
)

# Register sub-apps
app.add_typer(system_app, name="system", help="System: settings, info")
app.add_typer(logs_app, name="logs", help="Logs: run history")

# Register standalone commands
app.command(name="certify")(certify_cmd)
app.command(name="sfl")(sfl_cmd)
app.command(name="monodromy")(monodromy_cmd)
app.command(name="oracle")(oracle_cmd)
app.command(name="init")(init_cmd)


@app.command()
def version():
    """Show version info."""
    from src import __version__

    console.print(Panel(
        f"[bold green]hsfl[/bold green] v{__version__}\n"
        "[dim]Spectral-flow bifurcation detection for Hamiltonian systems[/dim]",
        title="Version",
        border_style="blue",
    ))


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress to stderr"),
):
    """hsfl: spectral-flow bifurcation detection for Hamiltonian systems."""
    setup_logging(verbose)
    if ctx.invoked_subcommand is None:
        console.print(Panel(
            Text("hsfl", style="bold green"),
            subtitle="Spectral-flow bifurcation detection",
            border_style="green",
        ))
        console.print(
            "\n[bold]Commands:[/bold]\n"
            "  [cyan]certify[/cyan]     Comparison certificate: guaranteed bifurcations and count\n"
            "  [cyan]sfl[/cyan]         Spectral flow of the Galerkin Hessian path\n"
            "  [cyan]monodromy[/cyan]   Lambda-scan of the linearized system\n"
            "  [cyan]oracle[/cyan]      Closed-form results for scalar families\n"
            "  [cyan]init[/cyan]        Write a template run config\n"
            "  [cyan]system[/cyan]      Settings and environment info\n"
            "  [cyan]logs[/cyan]        Run history\n"
            "\n[dim]Exit codes: 0 ok, 1 input, 2 endpoint, 3 inconclusive, 4 numerical[/dim]\n"
            "[dim]Run[/dim] [bold cyan]hsfl --help[/bold cyan] [dim]for all options[/dim]"
        )


if __name__ == "__main__":
    app()
