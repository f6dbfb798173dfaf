"""Logs command group - view and manage the run history."""

from __future__ import annotations

from typing import Any

import typer
from rich.table import Table

from src.core.console import console, success_panel
from src.core.logger import get_logger

logs_app = typer.Typer(help="Run history management")


def _history_table(title: str, entries: list[dict[str, Any]]) -> Table:
    table = Table(title=title)
    table.add_column("Timestamp", style="dim")
    table.add_column("Command", style="cyan")
    table.add_column("Config")
    table.add_column("Exit", justify="right")
    table.add_column("Verdict", style="green")

    for entry in entries:
        ts = entry.get("timestamp", "")
        # Trim microseconds for readability
        if "." in ts:
            ts = ts.split(".")[0]
        table.add_row(
            ts,
            entry.get("command", ""),
            entry.get("config", ""),
            str(entry.get("exit_code", "")),
            entry.get("verdict", ""),
        )
    return table


@logs_app.command()
def show(
    limit: int = typer.Option(50, "--limit", "-n", help="Number of entries to show"),
) -> None:
    """Show recent runs."""
    entries = get_logger().read(limit=limit)

    if not entries:
        console.print("[dim]No runs recorded.[/dim]")
        return

    console.print(_history_table(f"Run History (last {len(entries)})", entries))


@logs_app.command()
def tail() -> None:
    """Show the last 10 runs."""
    entries = get_logger().read(limit=10)

    if not entries:
        console.print("[dim]No runs recorded.[/dim]")
        return

    console.print(_history_table("Run History (tail)", entries))


@logs_app.command()
def clear(
    yes: bool = typer.Option(False, "--yes", "-y", help="Skip confirmation"),
) -> None:
    """Clear the run history."""
    if not yes:
        typer.confirm("Clear the run history?", abort=True)
    count = get_logger().clear()
    success_panel("History Cleared", f"Removed {count} entries.")
