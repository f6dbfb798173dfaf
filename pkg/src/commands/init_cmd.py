"""``hsfl init``: starter run config, .env and data directory."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import typer

from src.core.config import get_config, template_config
from src.core.console import console, error_panel, success_panel

ENV_TEMPLATE = Path(".env.example")
ENV_FILE = Path(".env")


def _env_status() -> str:
    """Create .env from .env.example unless one is already there."""
    if ENV_FILE.exists():
        return "[dim]kept existing file[/dim]"
    if ENV_TEMPLATE.exists():
        shutil.copy2(ENV_TEMPLATE, ENV_FILE)
        return f"[green]copied from {ENV_TEMPLATE}[/green]"
    return f"[dim]no {ENV_TEMPLATE}; defaults apply[/dim]"


def _prepare_history_dir() -> Path:
    logs = get_config().data_path / "logs"
    logs.mkdir(parents=True, exist_ok=True)
    return logs


def init_cmd(
    path: Path = typer.Argument(Path("hsfl.json"), help="Where to write the run config"),
    force: bool = typer.Option(False, "--force", help="Overwrite an existing file"),
) -> None:
    """Write a template run config (scalar family c = -0.5 + 2 lambda, n = 1)."""
    if path.exists() and not force:
        error_panel("Init Error", f"{path} already exists; use --force to overwrite")
        raise typer.Exit(code=1)

    path.write_text(json.dumps(template_config(), indent=2) + "\n", encoding="utf-8")
    console.print(f"[bold]Run config[/bold]: [green]{path}[/green]")
    console.print(f"[bold].env[/bold]: {_env_status()}")
    console.print(f"[bold]Run history[/bold]: {_prepare_history_dir()}\n")
    success_panel("Init Complete", f"Try: hsfl certify {path}")
