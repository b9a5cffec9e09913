import numpy as np
import pytest

from rankpath import (
    DimensionMismatch,
    NormalizationError,
    NoUsableEigenpair,
    ScalarField,
    Side,
    frobenius_distance,
    frobenius_inner,
    leading_nonzero_eigenpair,
    make_unitary_pair,
    numerical_rank,
    singular_values,
    unitary_completion,
)
from conftest import random_unitary


class TestFrobeniusInner:
    def test_identity(self):
        assert frobenius_inner(np.eye(2), np.eye(2)) == 2.0

    def test_disjoint_supports(self):
        a = [[1.0, 0.0], [0.0, 0.0]]
        b = [[0.0, 0.0], [0.0, 1.0]]
        assert frobenius_inner(a, b) == 0.0

    def test_hand_sum(self):
        a = np.array([[1.0, 1.0], [0.0, 0.0]])
        b = np.array([[1.0, 0.0], [1.0, 0.0]])
        by_hand = sum(
            a[i, j] * np.conj(b[i, j]) for i in range(2) for j in range(2)
        )
        assert by_hand == 1.0
        assert frobenius_inner(a, b) == by_hand

    def test_conjugate_symmetry(self, rng):
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        b = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        assert frobenius_inner(a, b) == pytest.approx(np.conj(frobenius_inner(b, a)))
        self_inner = frobenius_inner(a, a)
        assert abs(self_inner.imag) <= 1e-14 * self_inner.real
        assert self_inner.real >= 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            frobenius_inner(np.eye(2), np.eye(3))

    def test_field_mismatch(self):
        with pytest.raises(DimensionMismatch):
            frobenius_inner(np.eye(2), np.eye(2).astype(complex))


class TestFrobeniusDistance:
    def test_self_distance(self, rng):
        a = rng.standard_normal((3, 3))
        assert frobenius_distance(a, a) == 0.0

    def test_two_unit_entries(self):
        a = [[1.0, 0.0], [0.0, 0.0]]
        b = [[0.0, 0.0], [0.0, 1.0]]
        assert frobenius_distance(a, b) == pytest.approx(np.sqrt(2.0))

    def test_entrywise_differences(self):
        a = np.array([[1.0, 1.0], [0.0, 0.0]])
        b = np.array([[1.0, 0.0], [1.0, 0.0]])
        # differences are (0, 1, -1, 0)
        assert frobenius_distance(a, b) == pytest.approx(np.sqrt(2.0))


class TestSingularValues:
    def test_diagonal(self):
        np.testing.assert_allclose(singular_values(np.diag([3.0, 1.0])), [3.0, 1.0])

    def test_zero_rectangular(self):
        np.testing.assert_allclose(singular_values(np.zeros((2, 3))), [0.0, 0.0])

    def test_rank_one(self):
        sigma = singular_values(np.array([[1.0, 1.0], [0.0, 0.0]]))
        np.testing.assert_allclose(sigma, [np.sqrt(2.0), 0.0], atol=1e-15)

    def test_energy_identity(self, rng):
        for _ in range(50):
            a = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
            total = np.linalg.norm(a) ** 2
            assert abs(total - np.sum(singular_values(a) ** 2)) <= 1e-10 * total


class TestNumericalRank:
    def test_full(self):
        assert numerical_rank([3.0, 1.0], 1e-10) == 2

    def test_below_threshold(self):
        assert numerical_rank([1.0, 1e-14], 1e-10) == 1

    def test_zero(self):
        assert numerical_rank([0.0, 0.0], 1e-10) == 0


class TestUnitaryCompletion:
    def test_aligned_is_identity(self):
        u = unitary_completion(np.array([1.0, 0.0, 0.0]), Side.FIRST_ROW)
        np.testing.assert_allclose(u, np.eye(3), atol=1e-15)

    def test_swap_like(self):
        u = unitary_completion(np.array([0.0, 1.0]), Side.FIRST_ROW)
        np.testing.assert_allclose(u[0], [0.0, 1.0], atol=1e-15)
        assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-12

    def test_first_column(self):
        w = np.array([1.0, 1.0]) / np.sqrt(2.0)
        u = unitary_completion(w, Side.FIRST_COLUMN)
        np.testing.assert_allclose(u[:, 0], w, atol=1e-14)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            unitary_completion(np.array([1.0, 1.0]), Side.FIRST_ROW)

    def test_random_vectors_both_fields(self, rng):
        for field in ScalarField:
            for k in (1, 2, 5, 8):
                w = rng.standard_normal(k)
                if field is ScalarField.COMPLEX:
                    w = w + 1j * rng.standard_normal(k)
                w = w / np.linalg.norm(w)
                u = unitary_completion(w, Side.FIRST_ROW)
                np.testing.assert_allclose(u @ w, np.eye(k)[0], atol=1e-13)
                np.testing.assert_allclose(u[0], w.conj(), atol=1e-13)
                np.testing.assert_allclose(u @ u.conj().T, np.eye(k), atol=1e-12)
                v = unitary_completion(w, Side.FIRST_COLUMN)
                np.testing.assert_allclose(v[:, 0], w, atol=1e-13)


class TestLeadingEigenpair:
    def test_diagonal_dominant(self):
        value, vector = leading_nonzero_eigenpair(np.diag([2.0, 1.0]))
        assert value == pytest.approx(2.0)
        np.testing.assert_allclose(vector, [1.0, 0.0], atol=1e-12)

    def test_nilpotent_rejected(self):
        with pytest.raises(NoUsableEigenpair):
            leading_nonzero_eigenpair(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_real_rotation_rejected(self):
        with pytest.raises(NoUsableEigenpair):
            leading_nonzero_eigenpair(np.array([[0.0, -1.0], [1.0, 0.0]]))

    def test_complex_rotation_accepted(self):
        m = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)
        value, vector = leading_nonzero_eigenpair(m)
        assert abs(value) == pytest.approx(1.0)
        assert np.linalg.norm(m @ vector - value * vector) < 1e-10

    def test_residual_on_random_matrices(self, rng):
        rejected = 0
        for i in range(1000):
            m = rng.standard_normal((5, 5))
            if i % 2 == 0:
                m = m + 1j * rng.standard_normal((5, 5))
            try:
                value, vector = leading_nonzero_eigenpair(m, 1e-12)
            except NoUsableEigenpair:
                rejected += 1
                continue
            residual = np.linalg.norm(m @ vector - value * vector)
            assert residual <= 1e-10 * np.linalg.norm(m)
            assert np.linalg.norm(vector) == pytest.approx(1.0)
        # complex draws always admit; only real draws may lack a real eigenvalue
        assert rejected < 200


def test_inner_product_unitary_invariance(rng):
    for field in ScalarField:
        a = np.asarray(rng.standard_normal((3, 4)), dtype=field.dtype)
        b = np.asarray(rng.standard_normal((3, 4)), dtype=field.dtype)
        if field is ScalarField.COMPLEX:
            a = a + 1j * rng.standard_normal((3, 4))
            b = b + 1j * rng.standard_normal((3, 4))
        pair = make_unitary_pair(
            random_unitary(3, rng, field), random_unitary(4, rng, field)
        )
        assert pair.unitarity_residual <= 1e-12
        before = frobenius_inner(a, b)
        after = frobenius_inner(pair.apply(a), pair.apply(b))
        assert abs(after - before) <= 1e-10 * max(1.0, abs(before))
