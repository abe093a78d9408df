import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from surfelastic.tensor_kit import (
    SingularTensorError,
    ddot,
    ddot2,
    identity,
    identity4,
    inv,
    otimes,
    otimes_over,
    otimes_under,
    transpose,
)

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
tensors = arrays(np.float64, (3, 3), elements=finite)


def loop_products(A, B):
    """Index-loop oracle for the three dyadic products."""
    std = np.zeros((3, 3, 3, 3))
    over = np.zeros((3, 3, 3, 3))
    under = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    std[i, j, k, l] = A[i, j] * B[k, l]
                    over[i, j, k, l] = A[i, k] * B[j, l]
                    under[i, j, k, l] = A[i, l] * B[j, k]
    return std, over, under


class TestProducts:
    @given(tensors, tensors)
    def test_against_index_loops(self, A, B):
        std, over, under = loop_products(A, B)
        np.testing.assert_allclose(otimes(A, B), std, atol=1e-14)
        np.testing.assert_allclose(otimes_over(A, B), over, atol=1e-14)
        np.testing.assert_allclose(otimes_under(A, B), under, atol=1e-14)

    @given(tensors, tensors, tensors)
    def test_action_on_second_order(self, A, B, X):
        np.testing.assert_allclose(ddot(otimes_over(A, B), X), A @ X @ B.T, atol=1e-11)
        np.testing.assert_allclose(ddot(otimes_under(A, B), X), A @ X.T @ B.T, atol=1e-11)
        np.testing.assert_allclose(ddot(otimes(A, B), X), A * ddot2(B, X), atol=1e-11)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((4, 2, 3, 3))
        B = rng.standard_normal((4, 2, 3, 3))
        out = otimes_under(A, B)
        assert out.shape == (4, 2, 3, 3, 3, 3)
        np.testing.assert_allclose(out[2, 1], otimes_under(A[2, 1], B[2, 1]))

    @given(tensors)
    def test_identity4(self, X):
        np.testing.assert_allclose(ddot(identity4(), X), X, atol=1e-15)

    def test_identity_shape(self):
        I = identity((2, 5))
        assert I.shape == (2, 5, 3, 3)
        np.testing.assert_array_equal(I[1, 3], np.eye(3))


class TestInverse:
    @settings(max_examples=50)
    @given(tensors)
    def test_inverse_or_singular(self, A):
        scale = np.max(np.linalg.norm(A, axis=-1))
        if abs(np.linalg.det(A)) < 1e-10 * max(scale, 1e-3) ** 3:
            return
        np.testing.assert_allclose(inv(A) @ A, np.eye(3), atol=1e-6)

    def test_singular_raises(self):
        A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 0.0]])
        with pytest.raises(SingularTensorError):
            inv(A)
        with pytest.raises(np.linalg.LinAlgError):
            inv(np.zeros((2, 3, 3)))

    def test_transpose_batched(self):
        A = np.arange(18.0).reshape(2, 3, 3)
        np.testing.assert_array_equal(transpose(A)[1], A[1].T)
