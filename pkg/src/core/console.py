"""Shared Rich consoles and formatting helpers.

``console`` writes to stdout and serves the informational commands;
``err_console`` carries panels, tables and log records of the report commands
so that stdout holds nothing but the report.
"""

from __future__ import annotations

from rich.console import Console
from rich.panel import Panel
from rich.text import Text

console = Console()
err_console = Console(stderr=True)


def _target(stderr: bool) -> Console:
    return err_console if stderr else console


def success_panel(title: str, message: str, *, stderr: bool = False) -> None:
    """Display a success panel."""
    _target(stderr).print(
        Panel(Text(message, style="bold green"), title=title, border_style="green")
    )


def warning_panel(title: str, message: str, *, stderr: bool = True) -> None:
    _target(stderr).print(
        Panel(Text(message, style="bold yellow"), title=title, border_style="yellow")
    )


def error_panel(title: str, message: str, *, stderr: bool = True) -> None:
    """Display an error panel (stderr by default)."""
    _target(stderr).print(Panel(Text(message, style="bold red"), title=title, border_style="red"))
