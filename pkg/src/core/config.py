"""Configuration management for hsfl.

Two layers: ``HsflSettings`` comes from the environment and ``.env``;
``RunConfig`` is the strict per-run JSON document handed to every command.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial
from src.analysis.linalg import SymMatrix
from src.core.errors import HsflError, InputError

Matrix = list[list[float]]
AutoC = Literal["auto-scalar", "auto-shifted-mean"]


class HsflSettings(BaseSettings):
    """Central settings loaded from environment and .env file."""

    # Thread cap for grid evaluations; None lets the pool decide
    max_workers: Optional[int] = Field(default=None, ge=1, alias="HSFL_MAX_WORKERS")

    data_dir: str = Field(default="~/.hsfl", alias="HSFL_DATA_DIR")
    log_runs: bool = Field(default=True, alias="HSFL_LOG_RUNS")

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}

    @property
    def data_path(self) -> Path:
        """Resolved data directory path."""
        return Path(self.data_dir).expanduser()


def get_config() -> HsflSettings:
    """Get the global settings instance."""
    return HsflSettings()


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class KnotConfig(_Strict):
    """A_lambda(t) = sum_k cos_coeffs[k] cos(kt) + sum_k sin_coeffs[k-1] sin(kt)."""

    lam: float = Field(alias="lambda")
    cos_coeffs: list[Matrix] = Field(min_length=1)
    sin_coeffs: list[Matrix] = Field(default_factory=list)


class GalerkinConfig(_Strict):
    cutoff: Optional[int] = Field(default=None, ge=1)
    quad_points: Optional[int] = Field(default=None, ge=1)


class SflConfig(_Strict):
    lambda_grid: int = Field(default=64, ge=16)
    delta: Union[float, Literal["auto"]] = "auto"
    seed: int = 0
    tol_kernel: float = Field(default=1e-7, gt=0)
    max_retries: int = Field(default=5, ge=1)

    @field_validator("delta")
    @classmethod
    def _non_negative(cls, v: Union[float, str]) -> Union[float, str]:
        if isinstance(v, float) and v < 0:
            raise ValueError("delta must be non-negative or 'auto'")
        return v


class ComparisonConfig(_Strict):
    c0: Union[AutoC, Matrix] = Field(default="auto-scalar", alias="C0")
    c1: Union[AutoC, Matrix] = Field(default="auto-scalar", alias="C1")
    t_grid: Optional[int] = Field(default=None, ge=4)
    scan: bool = False


class MonodromyConfig(_Strict):
    steps: int = Field(default=2048, ge=64)
    lambda_grid: int = Field(default=64, ge=16)
    tol: float = Field(default=1e-7, gt=0)


class OutputConfig(_Strict):
    format: Literal["json", "csv"] = "json"
    traces: bool = False
    path: Optional[str] = None
    traces_path: Optional[str] = None


def _sym(entries: Matrix, dim: int, where: str) -> SymMatrix:
    try:
        m = SymMatrix(entries)
    except HsflError as e:
        raise ValueError(f"{where}: {e}") from e
    if m.dim != dim:
        raise ValueError(f"{where}: expected a {dim}x{dim} matrix, got {m.dim}x{m.dim}")
    return m


class RunConfig(_Strict):
    """One run: the family, the discretization and what to emit."""

    n: int = Field(ge=1)
    family: list[KnotConfig] = Field(min_length=2)
    galerkin: GalerkinConfig = Field(default_factory=GalerkinConfig)
    sfl: SflConfig = Field(default_factory=SflConfig)
    comparison: ComparisonConfig = Field(default_factory=ComparisonConfig)
    monodromy: MonodromyConfig = Field(default_factory=MonodromyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _check_matrices(self) -> RunConfig:
        dim = 2 * self.n
        for i, knot in enumerate(self.family):
            for name in ("cos_coeffs", "sin_coeffs"):
                for j, m in enumerate(getattr(knot, name)):
                    _sym(m, dim, f"family.{i}.{name}.{j}")
        lams = [k.lam for k in self.family]
        if lams[0] != 0.0 or lams[-1] != 1.0:
            raise ValueError(f"family: knots must span [0, 1], got [{lams[0]}, {lams[-1]}]")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("family: knot lambdas must be strictly increasing")
        for name in ("c0", "c1"):
            value = getattr(self.comparison, name)
            if isinstance(value, list):
                _sym(value, dim, f"comparison.{name.upper()}")
        return self

    @classmethod
    def parse(cls, data: Any, source: str = "<config>") -> RunConfig:
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            lines = [
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                for err in e.errors()
            ]
            raise InputError(f"{source}: invalid config\n" + "\n".join(lines)) from e

    @classmethod
    def load(cls, path: Path) -> RunConfig:
        """Read and validate a JSON run config; errors carry line/column or field paths."""
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot read config {path}: {e.strerror}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        return cls.parse(data, str(path))

    def echo(self) -> dict[str, Any]:
        """JSON-ready dump that re-parses to an equal config."""
        return self.model_dump(mode="json", by_alias=True)

    def with_overrides(self, overrides: dict[str, Any]) -> RunConfig:
        """Apply dotted-path overrides (``sfl.lambda_grid``) and re-validate."""
        data = self.echo()
        for dotted, value in overrides.items():
            if value is None:
                continue
            *parents, leaf = dotted.split(".")
            node = data
            for key in parents:
                node = node[key]
            node[leaf] = value
        return self.parse(data, "command-line overrides")

    def to_family(self) -> MatrixFamilyPath:
        return MatrixFamilyPath(
            [
                (k.lam, TrigMatrixPolynomial.from_matrices(k.cos_coeffs, k.sin_coeffs))
                for k in self.family
            ]
        )

    def comparison_source(self, side: Literal[0, 1]) -> Union[SymMatrix, str]:
        value = self.comparison.c0 if side == 0 else self.comparison.c1
        return SymMatrix(value) if isinstance(value, list) else value

    @property
    def delta(self) -> Optional[float]:
        """Fixed regularization shift, or None for seeded random retries."""
        return None if self.sfl.delta == "auto" else float(self.sfl.delta)


def template_config() -> dict[str, Any]:
    """Starter config: scalar family c(lambda) = -0.5 + 2 lambda with n = 1."""
    return RunConfig.parse(
        {
            "n": 1,
            "family": [
                {"lambda": 0.0, "cos_coeffs": [[[-0.5, 0.0], [0.0, -0.5]]]},
                {"lambda": 1.0, "cos_coeffs": [[[1.5, 0.0], [0.0, 1.5]]]},
            ],
        }
    ).echo()
