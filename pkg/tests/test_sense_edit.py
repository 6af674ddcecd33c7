"""Sense-edit formula guarantees and encoding combination."""

import numpy as np
import pytest

from sensespace import sense_edit
from sensespace.embedding_io import PromptEncoding
from sensespace.errors import IndexOutOfBounds, NearParallel, ShapeMismatch, WeightsInvalid
from sensespace.sense_space import MeaningDirection
from sensespace.synth import SynthSpec, generate_synthetic


def direction(vec, scale, which):
    vec = np.asarray(vec, dtype=np.float64)
    return MeaningDirection(vec / np.linalg.norm(vec), scale, which)


def random_instance(rng, dim):
    original = rng.standard_normal(dim) * rng.uniform(0.5, 3.0)
    remove = direction(rng.standard_normal(dim), rng.uniform(0.2, 4.0), 1)
    keep = direction(rng.standard_normal(dim), rng.uniform(0.2, 4.0), 2)
    return original, keep, remove


class TestEditSense:
    def test_orthogonal_original_collapses_to_sum(self):
        e = np.eye(3)
        out = sense_edit.edit_sense(e[2], direction(e[1], 1.0, 2), direction(e[0], 1.0, 1))
        np.testing.assert_allclose(out.edited_vector, e[2] + e[1], atol=1e-15)
        assert abs(out.edited_vector @ e[0]) <= 1e-15

    def test_hand_computed_rescale(self):
        # removing e1 from e1 and injecting (e1+e2)/sqrt(2): the projection
        # of the kept direction along e1 is removed and the remainder is
        # rescaled back to unit length, giving exactly e2
        e = np.eye(3)
        keep = direction(e[0] + e[1], 1.0, 2)
        remove = direction(e[0], 1.0, 1)
        out = sense_edit.edit_sense(e[0], keep, remove)
        np.testing.assert_allclose(out.edited_vector, e[1], atol=1e-12)

    def test_identity_decomposition_is_exact(self):
        rng = np.random.default_rng(0)
        original, keep, remove = random_instance(rng, 12)
        out = sense_edit.edit_sense(original, keep, remove)
        np.testing.assert_array_equal(
            out.edited_vector,
            original - out.removed_component + out.injected_component,
        )

    def test_orthogonality_to_removed(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            original, keep, remove = random_instance(rng, 16)
            out = sense_edit.edit_sense(original, keep, remove)
            v_r = remove.vector
            bound = 1e-8 * np.linalg.norm(out.edited_vector) * np.linalg.norm(v_r)
            assert abs(out.edited_vector @ v_r) <= bound

    def test_injected_norm_equals_keep_scale(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            original, keep, remove = random_instance(rng, 8)
            out = sense_edit.edit_sense(original, keep, remove)
            assert abs(np.linalg.norm(out.injected_component) - keep.scale) <= 1e-10

    def test_idempotence(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            original, keep, remove = random_instance(rng, 10)
            once = sense_edit.edit_sense(original, keep, remove).edited_vector
            twice = sense_edit.edit_sense(once, keep, remove).edited_vector
            np.testing.assert_allclose(
                twice, once, rtol=0, atol=1e-10 * np.linalg.norm(once)
            )

    def test_nullspace_preservation(self):
        rng = np.random.default_rng(4)
        original, keep, remove = random_instance(rng, 10)
        first = sense_edit.edit_sense(original, keep, remove)
        perp = original - first.removed_component
        out = sense_edit.edit_sense(perp, keep, remove)
        np.testing.assert_allclose(
            out.edited_vector - perp,
            out.injected_component,
            rtol=0,
            atol=1e-10 * max(np.linalg.norm(perp), keep.scale),
        )

    def test_same_label_rejected(self):
        e = np.eye(3)
        with pytest.raises(ValueError):
            sense_edit.edit_sense(e[2], direction(e[0], 1.0, 1), direction(e[1], 1.0, 1))

    def test_near_parallel_directions(self):
        e = np.eye(3)
        with pytest.raises(NearParallel):
            sense_edit.edit_sense(
                e[2],
                direction(e[0] + 1e-13 * e[1], 1.0, 2),
                direction(e[0], 1.0, 1),
            )

    def test_diagnostics_expose_dots(self):
        e = np.eye(3)
        out = sense_edit.edit_sense(e[0], direction(e[1], 1.0, 2), direction(e[0], 1.0, 1))
        assert out.diagnostics["original_dot_remove"] == pytest.approx(1.0)
        assert abs(out.diagnostics["edited_dot_remove"]) <= 1e-12


class TestEditPrompt:
    def encoding(self):
        rng = np.random.default_rng(5)
        return PromptEncoding("five tokens here of text", tuple("abcde"), rng.standard_normal((5, 6)))

    def directions(self):
        e = np.eye(6)
        return direction(e[1], 1.0, 2), direction(e[0], 1.0, 1)

    def test_empty_indices_identity(self):
        enc = self.encoding()
        keep, remove = self.directions()
        out = sense_edit.edit_prompt(enc, [], keep, remove)
        np.testing.assert_array_equal(out.matrix, enc.matrix)
        assert out.tokens == enc.tokens and out.text == enc.text

    def test_single_index_edit(self):
        enc = self.encoding()
        keep, remove = self.directions()
        out = sense_edit.edit_prompt(enc, [2], keep, remove)
        for row in (0, 1, 3, 4):
            np.testing.assert_array_equal(out.matrix[row], enc.matrix[row])
        expected = sense_edit.edit_sense(enc.matrix[2], keep, remove).edited_vector
        np.testing.assert_array_equal(out.matrix[2], expected)

    def test_multi_token_edit_is_per_row(self):
        enc = self.encoding()
        keep, remove = self.directions()
        out = sense_edit.edit_prompt(enc, [1, 3], keep, remove)
        for row in (1, 3):
            expected = sense_edit.edit_sense(enc.matrix[row], keep, remove).edited_vector
            np.testing.assert_array_equal(out.matrix[row], expected)

    def test_index_out_of_bounds(self):
        enc = self.encoding()
        keep, remove = self.directions()
        with pytest.raises(IndexOutOfBounds):
            sense_edit.edit_prompt(enc, [5], keep, remove)


class TestCombineEncodings:
    def encodings(self):
        rng = np.random.default_rng(6)
        m1 = rng.standard_normal((4, 5))
        m2 = rng.standard_normal((4, 5))
        return (
            PromptEncoding("a cat", ("a", "cat", "<pad>", "<pad>"), m1),
            PromptEncoding("a tree", ("a", "tree", "<pad>", "<pad>"), m2),
        )

    def test_convex_combination_of_identical_points(self):
        e1, _ = self.encodings()
        out = sense_edit.combine_encodings(e1, e1, 0.5, 0.5)
        np.testing.assert_allclose(out.matrix, e1.matrix, rtol=0, atol=1e-12)

    def test_degenerate_weights_return_first(self):
        e1, e2 = self.encodings()
        out = sense_edit.combine_encodings(e1, e2, 1.0, 0.0)
        np.testing.assert_array_equal(out.matrix, e1.matrix)

    def test_weighted_sum_and_label(self):
        e1, e2 = self.encodings()
        out = sense_edit.combine_encodings(e1, e2, 0.25, 0.75)
        np.testing.assert_allclose(out.matrix, 0.25 * e1.matrix + 0.75 * e2.matrix)
        assert out.text == "SUM(0.25*a cat, 0.75*a tree)"
        assert out.tokens == e1.tokens

    def test_linearity(self):
        e1, e2 = self.encodings()
        alpha, beta = 0.3, 0.6
        lhs = (
            sense_edit.combine_encodings(e1, e2, alpha, 1 - alpha).matrix
            + sense_edit.combine_encodings(e1, e2, beta, 1 - beta).matrix
        )
        mid = (alpha + beta) / 2
        rhs = 2 * sense_edit.combine_encodings(e1, e2, mid, 1 - mid).matrix
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_shape_mismatch(self):
        e1, _ = self.encodings()
        short = PromptEncoding("x", ("x",), np.zeros((1, 5)))
        with pytest.raises(ShapeMismatch):
            sense_edit.combine_encodings(e1, short, 0.5, 0.5)

    def test_weights_invalid(self):
        e1, e2 = self.encodings()
        with pytest.raises(WeightsInvalid):
            sense_edit.combine_encodings(e1, e2, 0.5, 0.6)


class TestEditOnSyntheticFit:
    def test_edited_ambiguous_vector_lands_on_kept_sense(self):
        import warnings

        from sensespace import sense_space
        from sensespace.errors import DegenerateSpectrum
        from sensespace.linalg import gram_schmidt_pair, proj

        bundle, triples, truth = generate_synthetic(SynthSpec(seed=11, context_scale=0.0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateSpectrum)
            d1, d2, _ = sense_space.fit_senses(bundle, triples)
        from sensespace.embedding_io import extract_triple_vectors

        v_amb, _, _ = extract_triple_vectors(bundle, triples[0])
        out = sense_edit.edit_sense(v_amb, keep=d2, remove=d1)
        v1 = d1.vector
        assert abs(out.edited_vector @ v1) <= 1e-8 * np.linalg.norm(out.edited_vector) * np.linalg.norm(v1)
        # inside the edit plane the result points along the cleaned kept direction
        u1, u2 = gram_schmidt_pair(d1.vector, d2.vector)
        in_plane = (out.edited_vector @ u1) * u1 + (out.edited_vector @ u2) * u2
        w = d2.vector - proj(d2.vector, d1.vector)
        cos = (in_plane @ w) / (np.linalg.norm(in_plane) * np.linalg.norm(w))
        assert cos >= 1 - 1e-8
