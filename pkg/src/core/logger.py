"""Run history and diagnostic logging for hsfl.

``RunLogger`` records one JSON line per CLI run in
``<data_dir>/logs/runs.jsonl``; ``setup_logging`` routes the library's
stdlib log records through Rich onto stderr.
"""

from __future__ import annotations

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from rich.logging import RichHandler

from src.core.config import get_config
from src.core.console import err_console


class RunLogger:
    """Log hsfl runs to ~/.hsfl/logs/runs.jsonl"""

    def __init__(self) -> None:
        config = get_config()
        self.enabled = config.log_runs
        self.log_dir: Path = config.data_path / "logs"
        self.log_file: Path = self.log_dir / "runs.jsonl"

    def log(
        self,
        command: str,
        config_file: Optional[str],
        exit_code: int,
        verdict: str = "",
        details: str = "",
    ) -> None:
        """Append a single run entry."""
        if not self.enabled:
            return
        self.log_dir.mkdir(parents=True, exist_ok=True)
        entry = {
            "timestamp": datetime.now().isoformat(),
            "command": command,
            "config": config_file or "",
            "exit_code": exit_code,
            "verdict": verdict,
            "details": details,
        }
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry) + "\n")

    def read(self, limit: int = 50) -> list[dict[str, Any]]:
        """Read last N run entries."""
        if not self.log_file.exists():
            return []
        lines = self.log_file.read_text(encoding="utf-8").strip().split("\n")
        entries = [json.loads(line) for line in lines if line.strip()]
        return entries[-limit:]

    def clear(self) -> int:
        """Clear the history. Returns count of entries cleared."""
        if not self.log_file.exists():
            return 0
        lines = self.log_file.read_text(encoding="utf-8").split("\n")
        count = len([line for line in lines if line.strip()])
        self.log_file.unlink()
        return count


def get_logger() -> RunLogger:
    """Get a new RunLogger instance."""
    return RunLogger()


def setup_logging(verbose: bool = False) -> None:
    """Send ``src.*`` log records to stderr through Rich; INFO with --verbose, else WARNING."""
    root = logging.getLogger("src")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = RichHandler(console=err_console, show_time=False, show_path=False, markup=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.INFO if verbose else logging.WARNING)
