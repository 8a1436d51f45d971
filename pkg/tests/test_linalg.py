import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclectx.linalg import (
    ShapeError,
    commutator_norm,
    is_unitary,
    kron,
    normalized,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def proj(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


P1 = proj([1, -1, 1])
P2 = proj([1, 1, 0])
P3 = proj([0, 0, 1])


class TestKron:
    def test_identity_case(self):
        np.testing.assert_allclose(kron(np.eye(2), np.eye(3)), np.eye(6), atol=0)

    def test_pauli_flip_on_first_qubit(self):
        state = np.zeros(4, dtype=complex)
        state[0] = 1.0  # |00>
        out = kron(X, np.eye(2)) @ state
        expected = np.zeros(4, dtype=complex)
        expected[2] = 1.0  # |10>
        np.testing.assert_allclose(out, expected, atol=0)

    def test_trace_multiplicativity(self):
        # trace(P1 (x) I2) = trace(P1) * trace(I2) = 1 * 2
        assert abs(np.trace(kron(P1, np.eye(2))) - 2.0) < 1e-12

    def test_dims_multiply(self):
        assert kron(np.ones((2, 3)), np.ones((4, 5))).shape == (8, 15)


class TestIsUnitary:
    def test_identity(self):
        assert is_unitary(np.eye(3), 1e-12)

    def test_record_gate_from_projector(self):
        u = kron(P1, X) + kron(np.eye(3) - P1, np.eye(2))
        assert is_unitary(u, 1e-12)

    def test_all_ones_not_unitary(self):
        assert not is_unitary(np.ones((3, 3)), 1e-12)

    def test_non_square_raises(self):
        with pytest.raises(ShapeError):
            is_unitary(np.ones((2, 3)))


class TestCommutatorNorm:
    def test_identity_commutes_with_anything(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert commutator_norm(np.eye(4), a) == 0.0

    def test_orthogonal_projectors_commute(self):
        assert commutator_norm(P1, P2) <= 1e-12

    def test_overlapping_projectors_do_not(self):
        # |<v1|v3>|^2 = 1/3, giving norm sqrt(2 c^2 (1 - c^2)) = 2/3
        n = commutator_norm(P1, P3)
        assert n > 0.1
        assert abs(n - 2.0 / 3.0) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            commutator_norm(np.eye(2), np.eye(3))
        with pytest.raises(ShapeError):
            commutator_norm(np.ones((2, 3)), np.ones((2, 3)))


small = st.integers(min_value=1, max_value=3)
finite = st.floats(-2, 2, allow_nan=False)


def matrices(rows, cols):
    return st.lists(finite, min_size=2 * rows * cols, max_size=2 * rows * cols).map(
        lambda xs: (np.array(xs[: rows * cols]) + 1j * np.array(xs[rows * cols:])).reshape(rows, cols)
    )


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(small, small, small, small, st.data())
    def test_kron_associative(self, p, q, r, s, data):
        a = data.draw(matrices(p, q))
        b = data.draw(matrices(q, r))
        c = data.draw(matrices(r, s))
        left = kron(kron(a, b), c)
        right = kron(a, kron(b, c))
        assert np.max(np.abs(left - right)) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**31 - 1))
    def test_unitary_preserves_norm(self, d, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        u, _ = np.linalg.qr(m)
        v = normalized(rng.standard_normal(d) + 1j * rng.standard_normal(d))
        assert abs(np.linalg.norm(u @ v) - 1.0) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 2**31 - 1))
    def test_commutator_norm_symmetric(self, d, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        assert abs(commutator_norm(a, b) - commutator_norm(b, a)) <= 1e-12
