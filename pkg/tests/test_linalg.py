"""Kernel tests: hand-computed cases plus algebraic property checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sensespace import linalg
from sensespace.errors import (
    DimensionMismatch,
    EmptyInput,
    NearParallel,
    NotSymmetric,
    ZeroVector,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def vectors(dim):
    return arrays(np.float64, (dim,), elements=finite_floats)


class TestProj:
    def test_axis_projection(self):
        np.testing.assert_allclose(linalg.proj([1, 1], [1, 0]), [1, 0])

    def test_self_projection_identity(self):
        v = np.array([0.3, -2.0, 5.5])
        np.testing.assert_allclose(linalg.proj(v, v), v, rtol=1e-15)

    def test_hand_computed(self):
        # a.b = 3 + 8 = 11, b.b = 5 -> (11/5) * [1, 2]
        np.testing.assert_allclose(linalg.proj([3, 4], [1, 2]), [2.2, 4.4], rtol=1e-15)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            linalg.proj([1.0, 2.0], [0.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            linalg.proj([1.0, 2.0], [1.0, 2.0, 3.0])

    @settings(max_examples=60, deadline=None)
    @given(a=vectors(5), b=vectors(5))
    def test_idempotent_and_residual_orthogonal(self, a, b):
        if np.linalg.norm(b) <= 1e-6:
            return
        p = linalg.proj(a, b)
        np.testing.assert_allclose(linalg.proj(p, b), p, rtol=0, atol=1e-12 * (1 + np.abs(p).max()))
        residual = a - p
        assert abs(residual @ b) <= 1e-10 * max(np.linalg.norm(a), 1.0) * np.linalg.norm(b)

    @settings(max_examples=60, deadline=None)
    @given(a=vectors(4), b=vectors(4))
    def test_sign_homogeneous_in_b(self, a, b):
        if np.linalg.norm(b) <= 1e-6:
            return
        np.testing.assert_array_equal(linalg.proj(a, -b), linalg.proj(a, b))


class TestAccumulateOuter:
    def test_single_vector(self):
        np.testing.assert_array_equal(
            linalg.accumulate_outer([[1.0, 0.0]]), [[1.0, 0.0], [0.0, 0.0]]
        )

    def test_orthonormal_pair_gives_identity(self):
        np.testing.assert_array_equal(
            linalg.accumulate_outer([[1.0, 0.0], [0.0, 1.0]]), np.eye(2)
        )

    def test_pair_deviations_are_rank_one(self):
        # deviations of {v_amb, v_s} about their mean are +-(v_s - v_amb)/2,
        # so the accumulated matrix is a single rank-1 term
        v_amb = np.array([1.0, 2.0, 0.5])
        v_s = np.array([-1.0, 0.0, 2.5])
        mean = (v_amb + v_s) / 2
        out = linalg.accumulate_outer([v_amb - mean, v_s - mean])
        d = (v_s - v_amb) / 2
        np.testing.assert_allclose(out, 2 * np.outer(d, d), rtol=0, atol=1e-14)
        eigvals = np.linalg.eigvalsh(out)
        assert np.sum(eigvals > 1e-12) == 1

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            linalg.accumulate_outer([])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            linalg.accumulate_outer([[1.0, 0.0], [1.0, 0.0, 0.0]])

    @settings(max_examples=40, deadline=None)
    @given(
        vs=st.lists(vectors(4), min_size=1, max_size=6),
    )
    def test_output_is_psd(self, vs):
        out = linalg.accumulate_outer(vs)
        eigvals = np.linalg.eigvalsh(out)
        scale = max(abs(eigvals).max(), 1.0)
        assert eigvals.min() >= -1e-9 * scale


class TestSymmetricEigendecomposition:
    def test_diagonal(self):
        vals, vecs = linalg.symmetric_eigendecomposition(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(vals, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(vecs), np.eye(2), atol=1e-15)

    def test_identity_degenerate_spectrum(self):
        vals, vecs = linalg.symmetric_eigendecomposition(np.eye(3))
        np.testing.assert_allclose(vals, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(vecs.T @ vecs, np.eye(3), atol=1e-10)

    def test_rank_one(self):
        w = np.array([1.0, 2.0, 2.0])
        vals, vecs = linalg.symmetric_eigendecomposition(np.outer(w, w))
        np.testing.assert_allclose(vals, [9.0, 0.0, 0.0], atol=1e-12)
        lead = vecs[:, 0]
        # canonical sign makes the largest-|entry| coordinate positive
        np.testing.assert_allclose(lead, w / 3.0, atol=1e-12)

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            linalg.symmetric_eigendecomposition([[0.0, 1.0], [0.0, 0.0]])

    @settings(max_examples=40, deadline=None)
    @given(
        mat=arrays(np.float64, (5, 5), elements=st.floats(min_value=-10, max_value=10)),
    )
    def test_reconstruction_orthonormality_trace(self, mat):
        m = mat @ mat.T  # PSD by construction
        vals, vecs = linalg.symmetric_eigendecomposition(m)
        norm = max(np.linalg.norm(m), 1e-30)
        assert np.linalg.norm(m - vecs @ np.diag(vals) @ vecs.T) <= 1e-8 * max(norm, 1.0)
        np.testing.assert_allclose(vecs.T @ vecs, np.eye(5), atol=1e-10)
        assert np.all(np.diff(vals) <= 1e-12 * max(vals[0], 1.0))
        assert abs(vals.sum() - np.trace(m)) <= 1e-8 * max(np.trace(m), 1.0)


class TestGramSchmidtPair:
    def test_axes(self):
        u1, u2 = linalg.gram_schmidt_pair([2.0, 0.0], [0.0, 3.0])
        np.testing.assert_allclose(u1, [1.0, 0.0])
        np.testing.assert_allclose(u2, [0.0, 1.0])

    def test_near_parallel(self):
        with pytest.raises(NearParallel):
            linalg.gram_schmidt_pair([1.0, 0.0], [1.0, 1e-14])

    def test_hand_computed(self):
        u1, u2 = linalg.gram_schmidt_pair([1.0, 1.0, 0.0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(u1, np.array([1.0, 1.0, 0.0]) / np.sqrt(2))
        np.testing.assert_allclose(u2, np.array([1.0, -1.0, 0.0]) / np.sqrt(2))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            linalg.gram_schmidt_pair([0.0, 0.0], [1.0, 0.0])

    @settings(max_examples=60, deadline=None)
    @given(v1=vectors(6), v2=vectors(6))
    def test_orthonormal_and_span(self, v1, v2):
        n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
        if n1 <= 1e-6 or n2 <= 1e-6:
            return
        try:
            u1, u2 = linalg.gram_schmidt_pair(v1, v2)
        except NearParallel:
            return
        assert abs(np.linalg.norm(u1) - 1) <= 1e-12
        assert abs(np.linalg.norm(u2) - 1) <= 1e-12
        assert abs(u1 @ u2) <= 1e-10
        # span check: both inputs reconstruct from the basis
        for v in (v1, v2):
            recon = (v @ u1) * u1 + (v @ u2) * u2
            np.testing.assert_allclose(recon, v, rtol=0, atol=1e-6 * max(n1, n2))
