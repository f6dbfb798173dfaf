"""Tests for dense symmetric-matrix algebra."""

import numpy as np
import pytest

from src.analysis.linalg import (
    SymMatrix,
    commutes_with_j,
    count_integers_half_open,
    eig_sym,
    exp_cj,
    integers_half_open,
    jacobi_eigh,
    loewner_leq,
    max_abs,
    morse_index,
    nullity,
    snap_integer,
    symplectic_j,
    symplectic_residual,
)
from src.core.errors import ConvergenceError, DimensionError, SymmetryError


class TestSymMatrix:
    """Construction rules for symmetric matrices."""

    def test_rejects_skew_matrix(self):
        """J is skew, not symmetric."""
        with pytest.raises(SymmetryError):
            SymMatrix(symplectic_j(1))

    def test_rejects_non_square(self):
        """Non-square input is a dimension error."""
        with pytest.raises(DimensionError):
            SymMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])

    def test_rejects_odd_phase_space_dimension(self):
        """Phase-space matrices need even dimension unless even=False."""
        with pytest.raises(DimensionError):
            SymMatrix(np.eye(3))
        assert SymMatrix(np.eye(3), even=False).dim == 3

    def test_round_off_asymmetry_is_symmetrized(self):
        """Tiny asymmetry is removed rather than rejected."""
        a = np.array([[1.0, 2.0], [2.0 + 1e-14, 3.0]])
        m = SymMatrix(a)
        assert m.entries[0, 1] == m.entries[1, 0]

    def test_entries_are_read_only(self):
        """The stored array cannot be mutated."""
        m = SymMatrix.identity(2)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0


class TestEigSym:
    """Eigendecomposition by LAPACK and by cyclic Jacobi."""

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    @pytest.mark.parametrize("dim", [2, 8, 32, 64])
    def test_reconstruction_residual(self, dim, method):
        """V diag(w) V^T reproduces random matrices up to 64x64 at round-off level."""
        rng = np.random.default_rng(dim)
        a = rng.normal(size=(dim, dim))
        m = SymMatrix(a + a.T)
        eig = eig_sym(m, method=method)
        assert max_abs(eig.reconstruct() - m.entries) <= 1e-11 * (1.0 + m.norm())
        v = eig.eigenvectors
        assert max_abs(v.T @ v - np.eye(dim)) <= 1e-11
        assert np.all(np.diff(eig.eigenvalues) >= 0.0)

    def test_identity(self):
        """I4 has eigenvalues (1, 1, 1, 1)."""
        eig = eig_sym(SymMatrix.identity(4))
        assert np.allclose(eig.eigenvalues, [1, 1, 1, 1])

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_diagonal_is_sorted(self, method):
        """diag(3, -1, 0, 2) gives ascending (-1, 0, 2, 3)."""
        eig = eig_sym(SymMatrix.diag([3, -1, 0, 2]), method=method)
        assert np.allclose(eig.eigenvalues, [-1, 0, 2, 3])

    def test_jacobi_matches_lapack(self):
        """Both solvers agree on a random 10x10 matrix and reconstruct it."""
        rng = np.random.default_rng(7)
        a = rng.normal(size=(10, 10))
        m = SymMatrix(a + a.T)
        jac = eig_sym(m, method="jacobi")
        lap = eig_sym(m, method="lapack")
        assert np.allclose(jac.eigenvalues, lap.eigenvalues, atol=1e-10)
        assert np.allclose(jac.reconstruct(), m.entries, atol=1e-10)
        v = jac.eigenvectors
        assert np.allclose(v.T @ v, np.eye(10), atol=1e-10)

    def test_jacobi_sweep_cap(self):
        """Hitting the sweep cap reports the off-diagonal residual."""
        a = np.array([[1.0, 0.5], [0.5, 2.0]])
        with pytest.raises(ConvergenceError) as exc:
            jacobi_eigh(a, max_sweeps=0)
        assert exc.value.residual > 0


class TestMorseIndex:
    """Negative-eigenvalue counts."""

    def test_examples(self):
        """I4 -> 0, -I4 -> 4, diag(-2, -1, 0, 3) -> 2."""
        assert morse_index(SymMatrix.identity(4)) == 0
        assert morse_index(SymMatrix.scalar(-1.0, 4)) == 4
        assert morse_index(SymMatrix.diag([-2, -1, 0, 3])) == 2

    def test_nullity(self):
        """Zero eigenvalues within tolerance are counted by nullity."""
        assert nullity(SymMatrix.diag([-2, 1e-12, 0, 3])) == 2

    @pytest.mark.parametrize("seed", range(6))
    def test_inertia_partitions_dimension(self, seed):
        """morse(A) + morse(-A) + nullity(A) = dim, with planted zero eigenvalues."""
        rng = np.random.default_rng(seed)
        dim = 2 * int(rng.integers(1, 9))
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        w = rng.normal(size=dim)
        planted = int(rng.integers(0, dim // 2 + 1))
        w[:planted] = 0.0
        a = SymMatrix((q * w) @ q.T)
        assert morse_index(a) + morse_index(-a) + nullity(a) == dim
        assert nullity(a) >= planted


class TestLoewner:
    """Loewner order checks."""

    def test_examples(self):
        """I <= 2I; diag(1, 3) and diag(2, 2) are incomparable; A <= A."""
        eye = SymMatrix.identity(2)
        assert loewner_leq(eye, eye * 2.0)
        assert not loewner_leq(SymMatrix.diag([1, 3]), SymMatrix.diag([2, 2]))
        a = SymMatrix([[1.0, 0.3], [0.3, -2.0]])
        assert loewner_leq(a, a)

    @pytest.mark.parametrize("seed", range(6))
    def test_antisymmetry_and_transitivity(self, seed):
        """A <= B <= C along positive steps gives A <= C; A <= B <= A forces A = B."""
        rng = np.random.default_rng(seed)
        dim = 2 * int(rng.integers(1, 5))

        def positive():
            g = rng.normal(size=(dim, dim))
            return SymMatrix(g @ g.T + 0.1 * np.eye(dim))

        g = rng.normal(size=(dim, dim))
        a = SymMatrix(g + g.T)
        b = a + positive()
        c = b + positive()
        assert loewner_leq(a, b) and loewner_leq(b, c)
        assert loewner_leq(a, c)
        assert not loewner_leq(b, a)
        assert not loewner_leq(c, a)
        twin = SymMatrix(a.entries.copy())
        assert loewner_leq(a, twin) and loewner_leq(twin, a)
        assert twin == a


class TestCommutesWithJ:
    """C commutes with J iff C = [[A, B], [-B, A]] with A symmetric, B skew."""

    def test_scalar_commutes(self):
        """c I commutes with J."""
        assert commutes_with_j(SymMatrix.scalar(2.5, 4))

    def test_diagonal_does_not(self):
        """diag(1, 2) does not commute for n = 1."""
        assert not commutes_with_j(SymMatrix.diag([1, 2]))

    def test_complex_structure_block(self):
        """Block form [[A, B], [-B, A]] commutes."""
        a = np.array([[1.0, 0.4], [0.4, -0.3]])
        b = np.array([[0.0, 0.7], [-0.7, 0.0]])
        c = SymMatrix(np.block([[a, b], [-b, a]]))
        assert commutes_with_j(c)


class TestSymplecticHelpers:
    """exp(cJt) and the symplectic residual."""

    @pytest.mark.parametrize(
        "c,expected",
        [(1.0, np.eye(2)), (0.5, -np.eye(2)), (0.0, np.eye(2))],
    )
    def test_full_period(self, c, expected):
        """exp(2 pi c J) at c = 1, 0.5, 0."""
        assert np.allclose(exp_cj(c, 2 * np.pi, 1), expected, atol=1e-14)

    def test_j_squares_to_minus_identity(self):
        """J^2 = -I and J^T = -J."""
        j = symplectic_j(3)
        assert np.array_equal(j @ j, -np.eye(6))
        assert np.array_equal(j.T, -j)

    def test_rotation_is_symplectic(self):
        """exp(cJt) preserves J."""
        assert symplectic_residual(exp_cj(0.37, 1.3, 2)) < 1e-14

    @pytest.mark.parametrize("seed", range(6))
    def test_group_law(self, seed):
        """exp(cJs) exp(cJt) = exp(cJ(s + t)); exp(-cJt) inverts exp(cJt)."""
        rng = np.random.default_rng(seed)
        c, s, t = rng.uniform(-3.0, 3.0, 3)
        n = int(rng.integers(1, 4))
        assert np.allclose(exp_cj(c, s, n) @ exp_cj(c, t, n), exp_cj(c, s + t, n), atol=1e-12)
        assert np.allclose(exp_cj(c, t, n) @ exp_cj(-c, t, n), np.eye(2 * n), atol=1e-12)


class TestIntegerCounting:
    """Half-open integer counts (a, b]."""

    @pytest.mark.parametrize(
        "a,b,count",
        [(-0.5, 1.5, 2), (0.0, 1.0, 1), (0.2, 0.9, 0), (0.9, 2.1, 2), (0.5, 0.5, 0)],
    )
    def test_counts(self, a, b, count):
        """Left endpoint excluded, right endpoint included."""
        assert count_integers_half_open(a, b) == count

    def test_members(self):
        """(-0.5, 1.5] holds 0 and 1."""
        assert integers_half_open(-0.5, 1.5) == [0, 1]

    def test_snapping(self):
        """Values within 1e-12 of an integer are treated as that integer."""
        assert snap_integer(1.0 - 1e-13) == 1.0
        assert count_integers_half_open(1.0 - 1e-13, 2.0) == 1
