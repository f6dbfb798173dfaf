"""Tests for crossing detection and spectral flow."""

from dataclasses import dataclass, field, replace

import numpy as np
import pytest

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial
from src.analysis.galerkin import (
    FourierBasisSpec,
    GalerkinOperator,
    HessianPath,
    HomotopyEdge,
    ReversedPath,
    SubPath,
)
from src.analysis.linalg import SymMatrix
from src.analysis.sfl import (
    DeltaPolicy,
    crossing_sum_positive,
    detect_crossings,
    sfl_count_bound,
    spectral_flow,
)
from src.core.errors import EndpointError, InputError, RetriesExhaustedError
from tests.conftest import random_poly, scalar_family


def _path(fam, cutoff=8):
    return HessianPath(FourierBasisSpec(fam.n, cutoff), fam)


@dataclass(frozen=True)
class _CubicTouchPath:
    """Diagonal path whose first eigenvalue is (tau - 1/2)^3; the others stay at 1."""

    spec: FourierBasisSpec = field(default_factory=lambda: FourierBasisSpec(1, 1))
    delta: float = 0.0

    def _diag(self, first: float, rest: float) -> np.ndarray:
        return np.diag([first] + [rest] * (self.spec.dim - 1))

    def operator(self, tau):
        entries = self._diag((tau - 0.5) ** 3, 1.0) + self.delta * np.eye(self.spec.dim)
        return GalerkinOperator(self.spec, SymMatrix(entries), tau, self.delta)

    def derivative(self, tau, side="right"):
        return self._diag(3.0 * (tau - 0.5) ** 2, 0.0)

    def kinks(self):
        return ()

    def shifted(self, delta):
        return replace(self, delta=delta)


class TestRisingScalarFamily:
    """c(lambda) = -0.5 + 2 lambda, n = 1: the reference case."""

    def test_value_and_crossings(self, rising_family):
        """+4 with crossings at 0.25 and 0.75, kernel dim 2, positive definite forms."""
        result = spectral_flow(_path(rising_family), lambda_grid=64)
        assert result.value == 4
        assert result.morse_difference == 4
        assert [c.lam for c in result.crossings] == pytest.approx([0.25, 0.75], abs=1e-6)
        for c in result.crossings:
            assert c.kernel_dim == 2
            assert c.positive_definite
            assert c.position == "interior"
            assert c.morse_jump == 2
            assert np.all(np.linalg.eigvalsh(c.form_matrix.entries) > 0)

    @pytest.mark.parametrize("cutoff", [4, 8, 16, 32])
    def test_cutoff_independence(self, rising_family, cutoff):
        """The value does not depend on N once mode 1 is resolved."""
        assert spectral_flow(_path(rising_family, cutoff)).value == 4

    def test_reversal_negates(self, rising_family):
        """Reversing the path gives -4, both as a path and as a family."""
        assert spectral_flow(ReversedPath(_path(rising_family))).value == -4
        assert spectral_flow(_path(rising_family.reversed())).value == -4

    def test_concatenation_is_additive(self, rising_family):
        """Splitting at lambda = 0.5 (c = 0.5, invertible) adds up."""
        path = _path(rising_family)
        first = spectral_flow(SubPath(path, 0.0, 0.5)).value
        second = spectral_flow(SubPath(path, 0.5, 1.0)).value
        assert (first, second) == (2, 2)

    def test_delta_stability(self, rising_family):
        """Two small admissible shifts give the same value."""
        path = _path(rising_family)
        a = spectral_flow(path, delta_policy=DeltaPolicy(delta=1e-5))
        b = spectral_flow(path, delta_policy=DeltaPolicy(delta=3e-5))
        assert a.value == b.value == 4
        assert a.delta_used == 1e-5

    def test_traces(self, rising_family):
        """Traces hold one spectrum per grid lambda."""
        result = spectral_flow(_path(rising_family), lambda_grid=32, traces=True)
        assert result.traces is not None
        assert result.traces.lambdas.shape == (33,)
        assert result.traces.eigenvalues.shape == (33, 34)
        assert np.all(np.diff(result.traces.eigenvalues, axis=1) >= 0)

    def test_crossing_sum_positive(self, rising_family):
        """The shortcut sum of kernel dimensions equals the spectral flow."""
        assert crossing_sum_positive(_path(rising_family)) == 4

    def test_crossing_sum_falls_back_on_decreasing_path(self, rising_family):
        """Negative forms fall back to the full spectral flow."""
        assert crossing_sum_positive(_path(rising_family.reversed())) == -4


class TestSpecialPaths:
    """Constant, singular and kinked paths."""

    def test_constant_invertible(self):
        """No lambda-dependence and no kernel: no crossings, value 0."""
        path = _path(scalar_family(0.3, 0.3))
        assert detect_crossings(path) == []
        assert spectral_flow(path).value == 0
        assert crossing_sum_positive(path) == 0

    def test_singular_endpoints_are_reported(self):
        """c(lambda) = lambda - 2 is singular at both ends and nowhere inside."""
        path = _path(scalar_family(-2.0, -1.0))
        assert detect_crossings(path) == [0.0, 1.0]

    def test_singular_endpoint_refused(self):
        """The spectral flow needs invertible endpoints."""
        with pytest.raises(EndpointError):
            spectral_flow(_path(scalar_family(0.0, 1.5)))

    def test_grid_too_coarse(self, rising_family):
        """lambda_grid below 16 is rejected."""
        with pytest.raises(InputError):
            spectral_flow(_path(rising_family), lambda_grid=8)

    def test_kink_at_integer(self):
        """A crossing at a kink counts m+(left form) - m-(right form)."""
        fam = MatrixFamilyPath.scalar([(0.0, -0.5), (0.5, 1.0), (1.0, 0.5)], 1)
        result = spectral_flow(_path(fam))
        assert result.value == 2
        kink = [c for c in result.crossings if c.left_form_matrix is not None]
        assert len(kink) == 1
        assert kink[0].lam == 0.5
        assert kink[0].contribution == 0
        assert kink[0].kernel_dim == 2

    def test_subpath_ending_at_crossing_refused(self, rising_family):
        """A subpath whose end is a crossing has a singular endpoint."""
        path = _path(rising_family)
        with pytest.raises(EndpointError):
            spectral_flow(SubPath(path, 0.0, 0.75))
        assert detect_crossings(SubPath(path, 0.0, 0.75))[-1] == 1.0


class TestDeltaPolicy:
    """Regularizing shift on a crossing with zero speed."""

    def test_random_delta_regularizes(self):
        """The unshifted crossing is degenerate; one random shift makes it regular."""
        result = spectral_flow(_CubicTouchPath())
        assert result.value == 1
        assert result.attempts == 2
        assert 1e-6 <= result.delta_used <= 1e-5
        assert result.crossings[0].lam < 0.5

    def test_fixed_delta_is_final(self):
        """A numeric delta is never redrawn: the first irregular crossing fails the run."""
        with pytest.raises(RetriesExhaustedError, match="fixed delta"):
            spectral_flow(_CubicTouchPath(), delta_policy=DeltaPolicy(delta=0.0))

    def test_fixed_delta_used_as_given(self, rising_family):
        """On a regular path the fixed delta is reported unchanged after one attempt."""
        result = spectral_flow(_path(rising_family), delta_policy=DeltaPolicy(delta=2e-6))
        assert result.delta_used == 2e-6
        assert result.attempts == 1


class TestHomotopyRectangle:
    """Homotopy invariance on the rectangle (lambda, s) in [0, 1]^2."""

    @pytest.mark.parametrize("seed", range(5))
    def test_rectangle_identity(self, seed):
        """sfl(s=0) = sfl(lambda=0) + sfl(s=1) - sfl(lambda=1)."""
        rng = np.random.default_rng(seed)
        fam = MatrixFamilyPath(
            [
                (0.0, TrigMatrixPolynomial.scalar(-0.5, 1) + random_poly(rng, 1, 1, 0.05)),
                (1.0, TrigMatrixPolynomial.scalar(1.5, 1) + random_poly(rng, 1, 1, 0.05)),
            ]
        )
        spec = FourierBasisSpec(1, 8)
        c0, c1 = SymMatrix.scalar(-0.3, 2), SymMatrix.scalar(1.3, 2)

        def flow(axis, fixed):
            return spectral_flow(HomotopyEdge(spec, fam, c0, c1, axis, fixed)).value

        bottom, left = flow("lambda", 0.0), flow("s", 0.0)
        top, right = flow("lambda", 1.0), flow("s", 1.0)
        assert bottom == left + top - right
        assert top == 4


class TestCountBound:
    """ceil(|sfl| / max dim ker)."""

    @pytest.mark.parametrize(
        "value,dim,bound", [(4, 2, 2), (0, 0, 0), (-3, 2, 2), (5, 4, 2)]
    )
    def test_bound(self, value, dim, bound):
        """Bound from the spectral flow and the largest kernel."""
        assert sfl_count_bound(value, dim) == bound
