"""Small real linear-algebra kernel used by the fitting and editing code.

Vectors and matrices are plain float64 numpy arrays. All functions are pure:
inputs are never modified and outputs are freshly allocated.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    NearParallel,
    NonFiniteEntry,
    NotSymmetric,
    NumericalFailure,
    ZeroVector,
)

# Absolute floor below which a norm counts as zero. Strict enough that real
# encoder vectors never trip it.
EPS_ZERO = 1e-12

# Relative floor (times the norm of the second vector) below which two
# directions count as collinear.
EPS_PARALLEL_REL = 1e-9


def as_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteEntry(f"{name} contains NaN or Inf")
    return v


def proj(a, b) -> np.ndarray:
    """Projection of ``a`` onto ``b``: (a.b / b.b) b."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"proj operands differ: {a.shape[0]} vs {b.shape[0]}")
    bb = float(b @ b)
    if np.sqrt(bb) <= EPS_ZERO:
        raise ZeroVector("cannot project onto a zero vector")
    return (float(a @ b) / bb) * b


def accumulate_outer(deviations) -> np.ndarray:
    """Sum of outer products v v^T over the given vectors.

    The result is symmetric positive semidefinite by construction.
    """
    vecs = [as_vector(v, f"deviations[{i}]") for i, v in enumerate(deviations)]
    if not vecs:
        raise EmptyInput("accumulate_outer needs at least one vector")
    dim = vecs[0].shape[0]
    for i, v in enumerate(vecs):
        if v.shape[0] != dim:
            raise DimensionMismatch(
                f"deviations[{i}] has length {v.shape[0]}, expected {dim}"
            )
    stacked = np.stack(vecs)
    out = stacked.T @ stacked
    # enforce exact symmetry against floating-point drift in the matmul
    return (out + out.T) / 2.0


def _check_symmetric(m: np.ndarray) -> None:
    scale = np.abs(m).max() if m.size else 0.0
    tol = 1e-12 * max(1.0, scale)
    asym = np.abs(m - m.T).max() if m.size else 0.0
    if asym > tol:
        raise NotSymmetric(f"max |M - M^T| = {asym:.3e} exceeds tolerance {tol:.3e}")


def symmetric_eigendecomposition(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric PSD matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted
    descending and clamped to be nonnegative, and eigenvectors as orthonormal
    columns. For a symmetric PSD matrix this coincides with its singular
    value decomposition. Each eigenvector's sign is canonicalized so its
    largest-magnitude entry is positive.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntry("matrix contains NaN or Inf")
    _check_symmetric(m)
    try:
        eigvals, eigvecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    norm_f = float(np.linalg.norm(m))
    neg_floor = -1e-10 * max(norm_f, 1e-300)
    if eigvals.size and eigvals[-1] < neg_floor:
        raise NumericalFailure(
            f"matrix is not PSD: smallest eigenvalue {eigvals[-1]:.3e}"
        )
    eigvals = np.clip(eigvals, 0.0, None)
    # deterministic sign: largest-|entry| coordinate of each column positive
    for j in range(eigvecs.shape[1]):
        i = int(np.argmax(np.abs(eigvecs[:, j])))
        if eigvecs[i, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    return eigvals, eigvecs


def gram_schmidt_pair(v1, v2) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (u1, u2) of span{v1, v2} with u1 along v1."""
    v1 = as_vector(v1, "v1")
    v2 = as_vector(v2, "v2")
    if v1.shape != v2.shape:
        raise DimensionMismatch(f"basis vectors differ: {v1.shape[0]} vs {v2.shape[0]}")
    n1 = float(np.linalg.norm(v1))
    if n1 <= EPS_ZERO:
        raise ZeroVector("v1 has zero norm")
    n2 = float(np.linalg.norm(v2))
    if n2 <= EPS_ZERO:
        raise ZeroVector("v2 has zero norm")
    u1 = v1 / n1
    w = v2 - (float(v2 @ u1)) * u1
    wn = float(np.linalg.norm(w))
    if wn <= EPS_PARALLEL_REL * n2:
        raise NearParallel(
            f"directions are numerically collinear (residual {wn:.3e} "
            f"vs {EPS_PARALLEL_REL * n2:.3e})"
        )
    return u1, w / wn
