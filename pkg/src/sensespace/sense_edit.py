"""Representation editing: push a token vector toward one sense, and
combine whole prompt encodings by weighted sum.

The edit removes a vector's entire projection onto the plane spanned by
the two scaled meaning directions, then adds back the kept direction with
its component along the removed direction projected out and rescaled to
the kept direction's original magnitude. The result is orthogonal to the
removed direction while the component outside the plane is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .embedding_io import PromptEncoding
from .errors import IndexOutOfBounds, ShapeMismatch, WeightsInvalid
from .sense_space import MeaningDirection

#: weights must satisfy alpha1 + alpha2 = 1 to this absolute tolerance
WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SenseEditOutcome:
    """Result of one sense edit.

    ``edited_vector == original - removed_component + injected_component``
    holds exactly, by construction.
    """

    edited_vector: np.ndarray
    removed_component: np.ndarray
    injected_component: np.ndarray
    diagnostics: dict


def edit_sense(
    original, keep: MeaningDirection, remove: MeaningDirection
) -> SenseEditOutcome:
    """Edit a token vector so the kept sense dominates.

    ``remove`` is the direction whose contribution is eliminated (the
    edited vector ends up orthogonal to it); ``keep`` is re-injected at its
    fitted magnitude.
    """
    x = linalg.as_vector(original, "original")
    if keep.which == remove.which:
        raise ValueError(
            f"keep and remove carry the same sense label {keep.which}"
        )
    v_remove = remove.vector
    v_keep = keep.vector
    u1, u2 = linalg.gram_schmidt_pair(v_remove, v_keep)
    if x.shape != u1.shape:
        raise ShapeMismatch(
            f"vector length {x.shape[0]} does not match directions ({u1.shape[0]})"
        )
    removed = (float(x @ u1)) * u1 + (float(x @ u2)) * u2
    w = v_keep - linalg.proj(v_keep, v_remove)
    injected = (float(np.linalg.norm(v_keep)) / float(np.linalg.norm(w))) * w
    edited = x - removed + injected
    diagnostics = {
        "original_dot_keep": float(x @ keep.unit),
        "original_dot_remove": float(x @ remove.unit),
        "edited_dot_keep": float(edited @ keep.unit),
        "edited_dot_remove": float(edited @ remove.unit),
    }
    return SenseEditOutcome(
        edited_vector=edited,
        removed_component=removed,
        injected_component=injected,
        diagnostics=diagnostics,
    )


def edit_prompt(
    encoding: PromptEncoding,
    token_indices,
    keep: MeaningDirection,
    remove: MeaningDirection,
) -> PromptEncoding:
    """Replace the rows at ``token_indices`` with their sense-edited
    versions; every other row is carried over bit-identically.

    Multi-token targets are edited independently per sub-token with the
    same direction pair.
    """
    indices = [int(i) for i in token_indices]
    rows = len(encoding.tokens)
    for i in indices:
        if not (0 <= i < rows):
            raise IndexOutOfBounds(
                f"token index {i} out of range [0, {rows}) for prompt "
                f"{encoding.text!r}"
            )
    matrix = encoding.matrix.copy()
    for i in indices:
        matrix[i] = edit_sense(matrix[i], keep, remove).edited_vector
    return PromptEncoding(encoding.text, encoding.tokens, matrix)


def combine_encodings(
    e1: PromptEncoding, e2: PromptEncoding, alpha1: float, alpha2: float
) -> PromptEncoding:
    """Weighted sum of two equal-shape prompt encodings.

    Weights must sum to one. Token strings are taken from the first
    encoding; the synthesized text records both sources and their weights.
    """
    if abs(alpha1 + alpha2 - 1.0) > WEIGHT_TOL:
        raise WeightsInvalid(
            f"weights must sum to 1, got {alpha1} + {alpha2} = {alpha1 + alpha2!r}"
        )
    if e1.matrix.shape != e2.matrix.shape:
        raise ShapeMismatch(
            f"encoding shapes differ: {e1.matrix.shape} vs {e2.matrix.shape}"
        )
    matrix = alpha1 * e1.matrix + alpha2 * e2.matrix
    text = f"SUM({alpha1:g}*{e1.text}, {alpha2:g}*{e2.text})"
    return PromptEncoding(text, e1.tokens, matrix)
