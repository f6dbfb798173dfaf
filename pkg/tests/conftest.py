"""Shared fixtures for hsfl tests."""

import json

import numpy as np
import pytest

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial


@pytest.fixture(autouse=True)
def isolated_data_dir(tmp_path, monkeypatch):
    """Keep run history out of the real home directory."""
    data_dir = tmp_path / "hsfl-data"
    monkeypatch.setenv("HSFL_DATA_DIR", str(data_dir))
    monkeypatch.setenv("HSFL_MAX_WORKERS", "1")
    return data_dir


def scalar_family(c0, c1, n=1):
    """c(lambda) I_2n with c linear from c0 to c1."""
    return MatrixFamilyPath.scalar([(0.0, c0), (1.0, c1)], n)


def random_poly(rng, n, freq, scale):
    """Random symmetric trigonometric polynomial with coefficient norms <= scale."""

    def sym():
        a = rng.uniform(-1.0, 1.0, (2 * n, 2 * n))
        a = 0.5 * (a + a.T)
        return scale * a / max(np.linalg.norm(a, 2), 1.0)

    return TrigMatrixPolynomial.from_matrices(
        [sym() for _ in range(freq + 1)], [sym() for _ in range(freq)]
    )


def write_config(path, c0, c1, n=1, **sections):
    """Write a scalar-family run config and return its path."""
    dim = 2 * n
    config = {
        "n": n,
        "family": [
            {"lambda": 0.0, "cos_coeffs": [(c0 * np.eye(dim)).tolist()]},
            {"lambda": 1.0, "cos_coeffs": [(c1 * np.eye(dim)).tolist()]},
        ],
        **sections,
    }
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def rising_family():
    """c(lambda) = -0.5 + 2 lambda, n = 1: crossings at 0.25 and 0.75."""
    return scalar_family(-0.5, 1.5)
