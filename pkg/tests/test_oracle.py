"""Tests for the closed-form scalar-family oracle."""

import numpy as np
import pytest

from src.analysis.family import MatrixFamilyPath, TrigMatrixPolynomial
from src.analysis.monodromy import closed_form_monodromy, fundamental_matrix
from src.analysis.oracle import solve
from src.core.errors import EndpointError, InputError
from tests.conftest import scalar_family


class TestSolve:
    """Crossings where c(lambda) is an integer."""

    def test_rising_family(self, rising_family):
        """-0.5 -> 1.5: sfl 4, crossings at 0.25 and 0.75 of dim 2."""
        result = solve(rising_family)
        assert result.sfl == 4
        assert result.crossing_lambdas == pytest.approx((0.25, 0.75))
        assert [c.kernel_dim for c in result.crossings] == [2, 2]
        assert [c.value for c in result.crossings] == [0, 1]
        assert result.scalar_bound == 2

    def test_constant_invertible(self):
        """c = 0.5 everywhere: nothing crosses."""
        result = solve(scalar_family(0.5, 0.5))
        assert result.sfl == 0
        assert result.crossings == ()
        assert np.allclose(result.monodromy_start, -np.eye(2))

    def test_endpoint_monodromies_match_rk4(self):
        """Endpoint monodromies are exp(2 pi c J), which RK4 reproduces for n = 2."""
        result = solve(scalar_family(0.3, 1.8, n=2))
        assert np.array_equal(result.monodromy_start, closed_form_monodromy(0.3, 2))
        assert np.array_equal(result.monodromy_end, closed_form_monodromy(1.8, 2))
        rk4 = fundamental_matrix(TrigMatrixPolynomial.scalar(1.8, 2))
        assert np.allclose(result.monodromy_end, rk4, atol=1e-8)

    def test_falling_family(self):
        """1.5 -> -0.5 gives -4 and no scalar bound."""
        result = solve(scalar_family(1.5, -0.5))
        assert result.sfl == -4
        assert all(c.contribution == -2 for c in result.crossings)
        assert result.scalar_bound == 0

    def test_higher_dimension(self):
        """n = 2 doubles every kernel."""
        result = solve(scalar_family(-0.5, 1.5, n=2))
        assert result.sfl == 8
        assert [c.kernel_dim for c in result.crossings] == [4, 4]

    def test_integer_at_kink(self):
        """A turning point at c = 1 contributes nothing; the flow is 2 (floor 0.5 - floor -0.5)."""
        fam = MatrixFamilyPath.scalar([(0.0, -0.5), (0.5, 1.0), (1.0, 0.5)], 1)
        result = solve(fam)
        assert result.sfl == 2
        kink = [c for c in result.crossings if c.lam == 0.5]
        assert kink[0].contribution == 0

    def test_integer_endpoint(self):
        """c(0) = 0 is singular."""
        with pytest.raises(EndpointError):
            solve(scalar_family(0.0, 1.5))

    def test_flat_integer_segment(self):
        """c constant at an integer on a segment has a continuum of crossings."""
        fam = MatrixFamilyPath.scalar([(0.0, 0.5), (0.3, 1.0), (0.6, 1.0), (1.0, 1.5)], 1)
        with pytest.raises(InputError):
            solve(fam)

    def test_non_scalar_family(self):
        """Only c(lambda) I families have a closed form."""
        poly = TrigMatrixPolynomial.from_matrices([np.eye(2), np.eye(2)])
        fam = MatrixFamilyPath([(0.0, poly), (1.0, poly)])
        with pytest.raises(InputError):
            solve(fam)
