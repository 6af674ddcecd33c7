"""Fit per-sense difference subspaces and meaning directions.

Given N sentence triples (ambiguous, sense-1, sense-2) for one polysemous
word, the fit runs in two stages per sense:

1. Pair each ambiguous token vector with the corresponding disambiguated
   one, take deviations about each pair's mean, accumulate their outer
   products, and eigendecompose. The top-k eigenvectors span the subspace
   in which the ambiguous and disambiguated representations differ; k is
   the smallest integer greater than 2 whose cumulative spectrum fraction
   strictly exceeds the threshold.

2. Average the own-sense vectors' projection into that subspace, then
   deflate the result against every other-sense vector until it is
   orthogonal to all of them, normalize, and rescale by the largest
   own-sense dot product.

The deflation recurrence (subtract the projection onto each other-sense
vector in input order) is applied in repeated passes until the
orthogonality tolerance is met; a single pass only guarantees
orthogonality to the last vector. Passes beyond the first are applied
through repeated squaring of the pass operator inside the invariant
subspace spanned by the iterate and the deflation vectors, which is
algebraically identical to running the recurrence 2^j times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np

from . import embedding_io, linalg
from .errors import (
    CollapsedDirection,
    DegenerateSpectrum,
    DimensionMismatch,
    NonPositiveScale,
    NumericalFailure,
    TooFewSentences,
)

#: cumulative spectrum fraction that the first k eigenvalues must strictly exceed
DEFAULT_THRESHOLD = 0.95

#: eigenvalues below this fraction of the largest count as numerically zero
RANK_TOL = 1e-12

#: target residual correlation |v.o| / (|v||o|) after deflation; one order
#: tighter than the 1e-8 orthogonality guarantee callers rely on
DEFLATION_TOL = 1e-9

#: deflation collapse threshold, relative to the pre-deflation norm
COLLAPSE_TOL = 1e-10

_MAX_SQUARINGS = 60


@dataclass(frozen=True, eq=False)
class DifferenceSubspace:
    """Orthonormal basis of the ambiguous-to-sense difference subspace.

    ``basis`` holds k orthonormal rows; ``singular_values`` is the full
    descending eigenvalue spectrum of the accumulated outer-product matrix.
    ``degenerate`` marks spectra with fewer than three nonzero eigenvalues,
    where the basis is rank-limited below the usual minimum of 3.
    """

    basis: np.ndarray
    singular_values: np.ndarray
    k: int
    which: str
    degenerate: bool = False

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        s = np.asarray(self.singular_values, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "singular_values", s)
        if self.k != b.shape[0]:
            raise DimensionMismatch(f"k={self.k} but basis has {b.shape[0]} rows")
        if s.size and (np.any(s < 0) or np.any(np.diff(s) > 0)):
            raise NumericalFailure("singular values must be nonnegative and descending")
        if b.size:
            gram = b @ b.T
            if float(np.abs(gram - np.eye(b.shape[0])).max()) > 1e-10:
                raise NumericalFailure("basis rows are not orthonormal within 1e-10")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class MeaningDirection:
    """Unit direction for one sense plus the magnitude that expresses it.

    The scaled direction ``scale * unit`` is what editing injects.
    """

    unit: np.ndarray
    scale: float
    which: int

    def __post_init__(self):
        u = np.asarray(self.unit, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "unit", u)
        n = float(np.linalg.norm(u))
        if abs(n - 1.0) > 1e-12:
            raise DimensionMismatch(f"unit norm is {n!r}, expected 1")
        if not self.scale > 0:
            raise NonPositiveScale(f"scale must be positive, got {self.scale}")

    @property
    def vector(self) -> np.ndarray:
        return self.scale * self.unit


@dataclass
class SenseFit:
    """Diagnostics for one sense's subspace and direction fit."""

    k: int
    spectrum: list[float]
    degenerate: bool
    scale: float
    scale_argmax: int
    deflation_sweeps: int
    deflation_residual: float


@dataclass
class FitReport:
    """Per-sentence dot products and spectra for a two-sense fit.

    ``rows`` holds, per triple, the dot products of the ambiguous, sense-1,
    and sense-2 token vectors with both fitted unit directions. These are
    diagnostic evidence (ambiguous vectors tending to sit below both
    directions, for example), not enforced properties.
    """

    threshold: float
    rows: list[dict] = field(default_factory=list)
    sense1: SenseFit | None = None
    sense2: SenseFit | None = None
    principal_angles_deg: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "rows": self.rows,
            "sense1": vars(self.sense1) if self.sense1 else None,
            "sense2": vars(self.sense2) if self.sense2 else None,
            "principal_angles_deg": self.principal_angles_deg,
        }


def select_k(spectrum: np.ndarray, threshold: float) -> tuple[int, int, bool]:
    """Pick the subspace dimension from a descending eigenvalue spectrum.

    Returns ``(k, rank, degenerate)``. k is the smallest integer >= 3 whose
    cumulative fraction of the total strictly exceeds ``threshold``, capped
    at the numerical rank; spectra of rank < 3 are flagged degenerate.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    total = float(spectrum.sum())
    if total <= 0.0:
        raise NumericalFailure("spectrum has no positive eigenvalues")
    rank = int(np.sum(spectrum > RANK_TOL * spectrum[0]))
    if rank < 3:
        return rank, rank, True
    running = float(spectrum[:2].sum())
    for k in range(3, len(spectrum) + 1):
        running += float(spectrum[k - 1])
        if running / total > threshold:
            return min(k, rank), rank, False
    return rank, rank, False


def build_difference_subspace(
    vector_sets, threshold: float = DEFAULT_THRESHOLD, which: str = ""
) -> DifferenceSubspace:
    """Difference subspace from N (ambiguous, disambiguated) vector pairs.

    Each pair contributes its two deviations about the pair mean; the
    accumulated outer-product matrix is eigendecomposed and the top-k
    eigenvectors form the basis. Emits a ``DegenerateSpectrum`` warning and
    returns a rank-limited basis when fewer than three eigenvalues are
    numerically nonzero.
    """
    pairs = [(linalg.as_vector(a, "pair"), linalg.as_vector(b, "pair")) for a, b in vector_sets]
    if len(pairs) < 2:
        raise TooFewSentences(f"need at least 2 sentence pairs, got {len(pairs)}")
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    dim = pairs[0][0].shape[0]
    deviations = []
    for a, b in pairs:
        if a.shape[0] != dim or b.shape[0] != dim:
            raise DimensionMismatch("sentence vectors disagree in dimension")
        mean = (a + b) / 2.0
        deviations.append(a - mean)
        deviations.append(b - mean)
    accumulated = linalg.accumulate_outer(deviations)
    eigvals, eigvecs = linalg.symmetric_eigendecomposition(accumulated)
    k, rank, degenerate = select_k(eigvals, threshold)
    if degenerate:
        warnings.warn(
            f"difference subspace {which or '(unlabeled)'} has rank {rank} < 3; "
            "returning a rank-limited basis",
            DegenerateSpectrum,
            stacklevel=2,
        )
    return DifferenceSubspace(
        basis=eigvecs[:, :k].T.copy(),
        singular_values=eigvals,
        k=k,
        which=which,
        degenerate=degenerate,
    )


def _worst_correlation(v: np.ndarray, others: list[np.ndarray], norms: np.ndarray) -> float:
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return np.inf
    dots = np.abs(np.array([float(v @ o) for o in others]))
    return float(np.max(dots / (nv * norms)))


def _sweep(v: np.ndarray, others: list[np.ndarray]) -> np.ndarray:
    for o in others:
        v = v - linalg.proj(v, o)
    return v


def _deflate(v0: np.ndarray, others: list[np.ndarray]) -> tuple[np.ndarray, int, float]:
    """Run the deflation recurrence until orthogonal to every vector.

    Returns ``(vector, passes_applied, residual_correlation)``.
    """
    n0 = float(np.linalg.norm(v0))
    norms = np.array([float(np.linalg.norm(o)) for o in others])
    v = _sweep(v0.copy(), others)
    if float(np.linalg.norm(v)) <= COLLAPSE_TOL * n0:
        raise CollapsedDirection("deflation annihilated the direction")
    worst = _worst_correlation(v, others, norms)
    if worst <= DEFLATION_TOL:
        return v, 1, worst
    # Accelerate further passes: one pass is a fixed linear operator on the
    # span of the iterate and the deflation vectors, so express it there and
    # square repeatedly. Stop on the residual, not on operator stagnation;
    # over-squaring eventually decays even the fixed subspace in floating
    # point.
    q, _ = np.linalg.qr(np.column_stack([v] + list(others)))
    r = q.shape[1]
    op = np.empty((r, r))
    for j in range(r):
        op[:, j] = q.T @ _sweep(q[:, j].copy(), others)
    x0 = q.T @ v
    power = op
    passes = 1
    for j in range(1, _MAX_SQUARINGS + 1):
        power = power @ power
        candidate = q @ (power @ x0)
        passes = 1 + 2**j
        if float(np.linalg.norm(candidate)) <= COLLAPSE_TOL * n0:
            raise CollapsedDirection("deflation annihilated the direction")
        worst = _worst_correlation(candidate, others, norms)
        if worst <= DEFLATION_TOL:
            return candidate, passes, worst
    raise NumericalFailure(
        f"deflation did not reach tolerance {DEFLATION_TOL} "
        f"(residual {worst:.3e} after {passes} passes)"
    )


def _estimate_with_diagnostics(
    subspace: DifferenceSubspace, own_sense_vectors, other_sense_vectors, which: int
) -> tuple[MeaningDirection, dict]:
    own = [linalg.as_vector(v, "own") for v in own_sense_vectors]
    others = [linalg.as_vector(v, "other") for v in other_sense_vectors]
    if not own:
        raise TooFewSentences("need at least one own-sense vector")
    dim = subspace.dim
    for v in own + others:
        if v.shape[0] != dim:
            raise DimensionMismatch(
                f"vector length {v.shape[0]} does not match subspace dim {dim}"
            )
    # fixed-order accumulation keeps the projection exactly invariant under
    # sign flips of basis rows (coefficient and direction flip together);
    # BLAS matmul reductions do not guarantee that at the last ulp
    own_matrix = np.stack(own)
    v0 = np.zeros(dim)
    for row in subspace.basis:
        v0 += float(np.mean(own_matrix @ row)) * row
    if others:
        deflated, sweeps, residual = _deflate(v0, others)
    else:
        deflated, sweeps, residual = v0, 0, 0.0
    norm = float(np.linalg.norm(deflated))
    if norm <= COLLAPSE_TOL * float(np.linalg.norm(v0)):
        raise CollapsedDirection("deflation annihilated the direction")
    unit = deflated / norm
    dots = np.array([float(v @ unit) for v in own])
    best = int(np.argmax(dots))
    scale = float(dots[best])
    if scale <= 0.0:
        raise NonPositiveScale(
            f"largest own-sense projection is {scale:.3e}; fit is unusable"
        )
    diagnostics = {
        "scale_argmax": best,
        "deflation_sweeps": sweeps,
        "deflation_residual": residual,
    }
    return MeaningDirection(unit=unit, scale=scale, which=which), diagnostics


def estimate_direction(
    subspace: DifferenceSubspace, own_sense_vectors, other_sense_vectors, which: int = 1
) -> MeaningDirection:
    """Estimate one sense's scaled meaning direction.

    Averages the own-sense vectors' projection into the difference
    subspace, deflates the result against each other-sense vector (in input
    order, repeating passes until orthogonal to all of them), normalizes,
    and scales by the largest own-sense dot product.
    """
    direction, _ = _estimate_with_diagnostics(
        subspace, own_sense_vectors, other_sense_vectors, which
    )
    return direction


def principal_angles_deg(basis_a: np.ndarray, basis_b: np.ndarray) -> list[float]:
    """Principal angles (degrees) between two row-vector bases."""
    if basis_a.size == 0 or basis_b.size == 0:
        return []
    sv = np.linalg.svd(basis_a @ basis_b.T, compute_uv=False)
    return list(np.degrees(np.arccos(np.clip(sv, -1.0, 1.0))))


def fit_senses(
    bundle: embedding_io.EmbeddingBundle,
    triples,
    threshold: float = DEFAULT_THRESHOLD,
) -> tuple[MeaningDirection, MeaningDirection, FitReport]:
    """Fit both meaning directions for a word from its sentence triples."""
    triples = list(triples)
    amb_vecs, s1_vecs, s2_vecs = [], [], []
    for t in triples:
        va, v1, v2 = embedding_io.extract_triple_vectors(bundle, t)
        amb_vecs.append(va)
        s1_vecs.append(v1)
        s2_vecs.append(v2)

    def _labeled(label, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            if isinstance(exc, (CollapsedDirection, NonPositiveScale, TooFewSentences,
                                DimensionMismatch, NumericalFailure)):
                raise type(exc)(f"{label}: {exc}") from exc
            raise

    sub1 = _labeled("sense 1", build_difference_subspace,
                    list(zip(amb_vecs, s1_vecs)), threshold, "amb->1")
    sub2 = _labeled("sense 2", build_difference_subspace,
                    list(zip(amb_vecs, s2_vecs)), threshold, "amb->2")
    d1, diag1 = _labeled("sense 1", _estimate_with_diagnostics, sub1, s1_vecs, s2_vecs, 1)
    d2, diag2 = _labeled("sense 2", _estimate_with_diagnostics, sub2, s2_vecs, s1_vecs, 2)

    report = FitReport(threshold=threshold)
    for t, va, v1, v2 in zip(triples, amb_vecs, s1_vecs, s2_vecs):
        report.rows.append(
            {
                "amb": t.amb,
                "amb_dot_1": float(va @ d1.unit),
                "amb_dot_2": float(va @ d2.unit),
                "s1_dot_1": float(v1 @ d1.unit),
                "s1_dot_2": float(v1 @ d2.unit),
                "s2_dot_1": float(v2 @ d1.unit),
                "s2_dot_2": float(v2 @ d2.unit),
            }
        )
    for label, sub, d, diag in (
        ("sense1", sub1, d1, diag1),
        ("sense2", sub2, d2, diag2),
    ):
        fit = SenseFit(
            k=sub.k,
            spectrum=[float(s) for s in sub.singular_values],
            degenerate=sub.degenerate,
            scale=d.scale,
            scale_argmax=diag["scale_argmax"],
            deflation_sweeps=diag["deflation_sweeps"],
            deflation_residual=diag["deflation_residual"],
        )
        setattr(report, label, fit)
    report.principal_angles_deg = principal_angles_deg(sub1.basis, sub2.basis)
    return d1, d2, report


# --- directions file: JSON with both scaled directions ---

def save_directions(path, d1: MeaningDirection, d2: MeaningDirection) -> None:
    import json

    payload = {
        "dim": int(d1.unit.shape[0]),
        "sense1": {"unit": d1.unit.tolist(), "scale": d1.scale},
        "sense2": {"unit": d2.unit.tolist(), "scale": d2.scale},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_directions(path) -> tuple[MeaningDirection, MeaningDirection]:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    out = []
    for which in (1, 2):
        entry = payload[f"sense{which}"]
        unit = np.asarray(entry["unit"], dtype=np.float64)
        unit = unit / float(np.linalg.norm(unit))
        out.append(MeaningDirection(unit=unit, scale=float(entry["scale"]), which=which))
    return out[0], out[1]
