"""Tests for the run engine and its cross-checks between engines."""

import numpy as np
import pytest

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial
from src.analysis.galerkin import FourierBasisSpec, HessianPath
from src.analysis.monodromy import scan_lambda
from src.analysis.sfl import spectral_flow
from src.core.config import RunConfig
from src.core.engine import AGREEMENT_TOL, run_certify, run_monodromy, run_oracle, run_sfl
from src.core.report import render
from tests.conftest import random_poly


def _scalar_config(c0, c1, **sections):
    return RunConfig.parse(
        {
            "n": 1,
            "family": [
                {"lambda": 0.0, "cos_coeffs": [[[c0, 0.0], [0.0, c0]]]},
                {"lambda": 1.0, "cos_coeffs": [[[c1, 0.0], [0.0, c1]]]},
            ],
            **sections,
        }
    )


def _perturbed_family(rng):
    """(-0.4 + 2 lambda) I plus random trig perturbations with ||P(t)|| <= 0.3 at each end.

    Both ends stay within 0.3 of a scalar at distance 0.4 from the integers, so
    they are invertible; dA/dlambda >= 1.4 I makes every crossing positive.
    """
    n = int(rng.integers(1, 3))
    freq = int(rng.integers(0, 3))
    scale = 0.3 / (2 * freq + 1)
    start = TrigMatrixPolynomial.scalar(-0.4, n) + random_poly(rng, n, freq, scale)
    end = TrigMatrixPolynomial.scalar(1.6, n) + random_poly(rng, n, freq, scale)
    return MatrixFamilyPath([(0.0, start), (1.0, end)]), n


def _assert_agreement(fam, n):
    result = spectral_flow(HessianPath(FourierBasisSpec(n, 12), fam), lambda_grid=128)
    points = scan_lambda(fam, lambda_grid=128)
    assert all(p.resolved for p in points)
    assert [p.lam for p in points] == pytest.approx(
        [c.lam for c in result.crossings], abs=AGREEMENT_TOL
    )
    assert [p.kernel_dim for p in points] == [c.kernel_dim for c in result.crossings]
    return result, points


class TestGalerkinMonodromyAgreement:
    """Galerkin crossings and monodromy singular lambdas coincide."""

    @pytest.mark.parametrize("seed", range(20))
    def test_perturbed_families(self, seed):
        """Same lambdas and kernel dimensions; the flow counts every kernel once."""
        fam, n = _perturbed_family(np.random.default_rng(seed))
        result, points = _assert_agreement(fam, n)
        assert result.value == 4 * n
        assert sum(p.kernel_dim for p in points) == 4 * n

    def test_close_pairs(self):
        """Decoupled oscillators 1.5e-3 apart in lambda, inside one grid cell."""
        start = TrigMatrixPolynomial.constant(np.diag([-0.5, -0.497] * 2))
        end = TrigMatrixPolynomial.constant(np.diag([1.5, 1.503] * 2))
        result, points = _assert_agreement(MatrixFamilyPath([(0.0, start), (1.0, end)]), 2)
        assert [p.lam for p in points] == pytest.approx([0.2485, 0.25, 0.7485, 0.75], abs=1e-6)
        assert result.value == 8


class TestRunners:
    """run_* functions return reports with their exit codes."""

    def test_certify_with_scan(self):
        """Rising family: guaranteed, every cross-check passes."""
        outcome = run_certify(_scalar_config(-0.5, 1.5, comparison={"scan": True}))
        report = outcome.report
        assert report.exit_code == 0
        assert report.certificate.count_lower_bound == 2
        assert report.certificate.singular_lambdas == pytest.approx([0.25, 0.75], abs=1e-6)
        assert all(c.passed for c in report.cross_checks)

    def test_certify_truncation_warning(self):
        """A cutoff below the counted thresholds is flagged."""
        cfg = _scalar_config(-0.5, 3.5, galerkin={"cutoff": 2})
        report = run_certify(cfg).report
        assert any("cutoff N=2" in w for w in report.warnings)

    def test_sfl_traces(self):
        """Traces are returned only on request."""
        assert run_sfl(_scalar_config(-0.5, 1.5)).traces is None
        outcome = run_sfl(_scalar_config(-0.5, 1.5, output={"traces": True}))
        assert outcome.traces is not None

    def test_monodromy_report(self):
        """Endpoints, singular points and a symplectic monodromy."""
        report = run_monodromy(_scalar_config(-0.5, 1.5)).report
        assert len(report.monodromy.endpoints) == 2
        assert report.monodromy.endpoints[0].kernel_dim == 0
        assert report.monodromy.observed_order == pytest.approx(4.0, abs=0.3)
        assert all(c.passed for c in report.cross_checks)

    def test_oracle_report(self):
        """Closed form, Galerkin and RK4 agree on a falling family."""
        report = run_oracle(_scalar_config(2.5, 0.5)).report
        assert report.oracle.sfl == -4
        assert report.sfl.value == -4
        assert all(c.passed for c in report.cross_checks)

    def test_render_is_deterministic(self):
        """The same config renders to the same text."""
        cfg = _scalar_config(-0.5, 1.5)
        assert render(run_sfl(cfg).report) == render(run_sfl(cfg).report)
