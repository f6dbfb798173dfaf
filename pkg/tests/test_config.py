"""Tests for settings and run-config parsing."""

import json

import pytest

from src.analysis.linalg import SymMatrix
from src.core.config import HsflSettings, RunConfig, get_config, template_config
from src.core.errors import InputError


def _config(**extra):
    data = {
        "n": 1,
        "family": [
            {"lambda": 0.0, "cos_coeffs": [[[-0.5, 0.0], [0.0, -0.5]]]},
            {"lambda": 1.0, "cos_coeffs": [[[1.5, 0.0], [0.0, 1.5]]]},
        ],
    }
    data.update(extra)
    return data


class TestSettings:
    """Environment-driven settings."""

    def test_data_dir_from_env(self, isolated_data_dir):
        """HSFL_DATA_DIR sets the data path."""
        assert get_config().data_path == isolated_data_dir

    def test_max_workers_from_env(self, monkeypatch):
        """HSFL_MAX_WORKERS caps the pool."""
        monkeypatch.setenv("HSFL_MAX_WORKERS", "3")
        assert HsflSettings().max_workers == 3

    def test_log_runs_toggle(self, monkeypatch):
        """HSFL_LOG_RUNS=false disables run history."""
        monkeypatch.setenv("HSFL_LOG_RUNS", "false")
        assert HsflSettings().log_runs is False


class TestRunConfig:
    """Strict schema and validation messages."""

    def test_defaults(self):
        """Unspecified sections take their defaults."""
        cfg = RunConfig.parse(_config())
        assert cfg.sfl.lambda_grid == 64
        assert cfg.sfl.delta == "auto"
        assert cfg.delta is None
        assert cfg.monodromy.steps == 2048
        assert cfg.comparison.c0 == "auto-scalar"
        assert cfg.output.format == "json"

    def test_unknown_key_rejected(self):
        """Extra keys are errors, not silently ignored."""
        with pytest.raises(InputError, match="colour"):
            RunConfig.parse(_config(colour="red"))

    def test_non_square_matrix(self):
        """A malformed matrix reports its field path."""
        data = _config()
        data["family"][1]["cos_coeffs"] = [[[1.5, 0.0, 0.0], [0.0, 1.5, 0.0]]]
        with pytest.raises(InputError, match=r"family\.1\.cos_coeffs\.0"):
            RunConfig.parse(data)

    def test_asymmetric_matrix(self):
        """Asymmetric coefficients are rejected."""
        data = _config()
        data["family"][0]["cos_coeffs"] = [[[0.0, 1.0], [0.0, 0.0]]]
        with pytest.raises(InputError, match="symmetric"):
            RunConfig.parse(data)

    def test_wrong_dimension(self):
        """Coefficients must be 2n x 2n."""
        with pytest.raises(InputError, match="4x4"):
            RunConfig.parse(_config(n=2))

    def test_knots_must_span_unit_interval(self):
        """The last knot must sit at lambda = 1."""
        data = _config()
        data["family"][1]["lambda"] = 0.8
        with pytest.raises(InputError, match="span"):
            RunConfig.parse(data)

    def test_grid_lower_bounds(self):
        """lambda_grid >= 16 and steps >= 64."""
        with pytest.raises(InputError, match="lambda_grid"):
            RunConfig.parse(_config(sfl={"lambda_grid": 8}))
        with pytest.raises(InputError, match="steps"):
            RunConfig.parse(_config(monodromy={"steps": 32}))

    def test_negative_delta(self):
        """delta is a non-negative number or 'auto'."""
        with pytest.raises(InputError, match="delta"):
            RunConfig.parse(_config(sfl={"delta": -0.1}))
        assert RunConfig.parse(_config(sfl={"delta": 1e-4})).delta == 1e-4

    def test_comparison_matrices(self):
        """C0 and C1 accept a matrix or an auto mode."""
        cfg = RunConfig.parse(
            _config(comparison={"C0": [[-0.4, 0.0], [0.0, -0.4]], "C1": "auto-shifted-mean"})
        )
        assert cfg.comparison_source(0) == SymMatrix.scalar(-0.4, 2)
        assert cfg.comparison_source(1) == "auto-shifted-mean"

    def test_to_family(self):
        """The family is built from the knots."""
        fam = RunConfig.parse(_config()).to_family()
        assert fam.knot_lambdas == (0.0, 1.0)
        assert fam.n == 1


class TestLoadAndEcho:
    """Files, overrides and round-trips."""

    def test_json_error_location(self, tmp_path):
        """Syntax errors carry line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "n": 1,\n  "family": [\n}', encoding="utf-8")
        with pytest.raises(InputError, match=r"bad\.json:4:1"):
            RunConfig.load(path)

    def test_missing_file(self, tmp_path):
        """An unreadable config is an input error."""
        with pytest.raises(InputError, match="cannot read"):
            RunConfig.load(tmp_path / "missing.json")

    def test_echo_round_trip(self, tmp_path):
        """The echoed config re-parses to an equal config."""
        cfg = RunConfig.parse(_config(comparison={"C0": [[-0.4, 0.0], [0.0, -0.4]]}))
        path = tmp_path / "echo.json"
        path.write_text(json.dumps(cfg.echo()), encoding="utf-8")
        again = RunConfig.load(path)
        assert again == cfg
        assert again.echo() == cfg.echo()
        assert "lambda" in cfg.echo()["family"][0]
        assert "C0" in cfg.echo()["comparison"]

    def test_overrides(self):
        """Dotted overrides replace values; None leaves them alone."""
        cfg = RunConfig.parse(_config()).with_overrides(
            {"sfl.lambda_grid": 128, "galerkin.cutoff": None, "sfl.delta": "auto"}
        )
        assert cfg.sfl.lambda_grid == 128
        assert cfg.galerkin.cutoff is None

    def test_invalid_override(self):
        """Overrides are validated like the file."""
        with pytest.raises(InputError, match="command-line overrides"):
            RunConfig.parse(_config()).with_overrides({"monodromy.steps": 10})

    def test_delta_override_from_string(self):
        """A numeric --delta string is coerced to a float."""
        cfg = RunConfig.parse(_config()).with_overrides({"sfl.delta": "0.001"})
        assert cfg.delta == 0.001

    def test_template_is_valid(self):
        """The init template parses."""
        cfg = RunConfig.parse(template_config())
        assert cfg.n == 1
