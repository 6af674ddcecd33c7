"""Synthetic embedding bundles with sense structure known by construction.

Each generated triple follows the mixture model

    v_amb = a*m1 + b*m2 + c_n + sigma*g
    v_s1  = s*m1        + c_n + sigma*g
    v_s2  =        s*m2 + c_n + sigma*g

where m1, m2 are orthonormal planted directions, c_n is a per-sentence
context vector projected orthogonal to span{m1, m2} and scaled to
``context_scale``, and g is a fresh standard normal draw per emitted
vector. The same underlying gaussian draws are used regardless of
``noise_sigma``, so runs with one seed and different noise levels share
their randomness.

Matrices are rounded to float32 precision at generation time (the file
format's width), so a generated bundle survives save/load unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embedding_io import EmbeddingBundle, PromptEncoding, SentenceTriple
from .errors import DimensionMismatch, InvalidSpec
from .sense_space import MeaningDirection

TARGET_WORD = "orb"
TARGET_INDEX = 2


@dataclass
class SynthSpec:
    dim: int = 64
    n_sentences: int = 8
    amb_coeffs: tuple[float, float] = (0.5, 0.5)
    sense_coeff: float = 1.0
    context_scale: float = 0.25
    noise_sigma: float = 0.0
    seed: int = 0
    planted_m1: np.ndarray | None = None
    planted_m2: np.ndarray | None = None

    def validate(self) -> None:
        if self.dim < 8:
            raise InvalidSpec(f"dim must be >= 8, got {self.dim}")
        if self.n_sentences < 2:
            raise InvalidSpec(f"n_sentences must be >= 2, got {self.n_sentences}")
        if self.noise_sigma < 0:
            raise InvalidSpec(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.sense_coeff <= 0:
            raise InvalidSpec(f"sense_coeff must be positive, got {self.sense_coeff}")
        if self.context_scale < 0:
            raise InvalidSpec(f"context_scale must be >= 0, got {self.context_scale}")
        for name in ("planted_m1", "planted_m2"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=np.float64)
            if v.shape != (self.dim,):
                raise InvalidSpec(f"{name} must have shape ({self.dim},)")
            if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
                raise InvalidSpec(f"{name} must be a unit vector")
        if self.planted_m1 is not None and self.planted_m2 is not None:
            dot = float(
                np.asarray(self.planted_m1, dtype=np.float64)
                @ np.asarray(self.planted_m2, dtype=np.float64)
            )
            if abs(dot) > 1e-9:
                raise InvalidSpec(f"planted directions must be orthogonal, dot={dot!r}")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "n_sentences": self.n_sentences,
            "amb_coeffs": list(self.amb_coeffs),
            "sense_coeff": self.sense_coeff,
            "context_scale": self.context_scale,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "planted_m1": None if self.planted_m1 is None else list(self.planted_m1),
            "planted_m2": None if self.planted_m2 is None else list(self.planted_m2),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        kwargs = dict(data)
        if kwargs.get("amb_coeffs") is not None:
            kwargs["amb_coeffs"] = tuple(kwargs["amb_coeffs"])
        for name in ("planted_m1", "planted_m2"):
            if kwargs.get(name) is not None:
                kwargs[name] = np.asarray(kwargs[name], dtype=np.float64)
        return cls(**kwargs)


@dataclass(frozen=True, eq=False)
class SynthTruth:
    """Planted directions and the generating spec."""

    m1: np.ndarray
    m2: np.ndarray
    spec: SynthSpec

    def save(self, path) -> None:
        payload = {
            "m1": self.m1.tolist(),
            "m2": self.m2.tolist(),
            "spec": self.spec.to_dict(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SynthTruth":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            m1=np.asarray(payload["m1"], dtype=np.float64),
            m2=np.asarray(payload["m2"], dtype=np.float64),
            spec=SynthSpec.from_dict(payload["spec"]),
        )


def _orthonormal_pair(rng: np.random.Generator, dim: int) -> tuple[np.ndarray, np.ndarray]:
    m1 = rng.standard_normal(dim)
    m1 /= np.linalg.norm(m1)
    m2 = rng.standard_normal(dim)
    m2 -= (m2 @ m1) * m1
    m2 /= np.linalg.norm(m2)
    return m1, m2


def _f32_round(matrix: np.ndarray) -> np.ndarray:
    return matrix.astype(np.float32).astype(np.float64)


def generate_synthetic(
    spec: SynthSpec,
) -> tuple[EmbeddingBundle, list[SentenceTriple], SynthTruth]:
    """Deterministically generate a bundle, its triples, and the truth."""
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if spec.planted_m1 is not None and spec.planted_m2 is not None:
        m1 = np.asarray(spec.planted_m1, dtype=np.float64)
        m2 = np.asarray(spec.planted_m2, dtype=np.float64)
    elif spec.planted_m1 is None and spec.planted_m2 is None:
        m1, m2 = _orthonormal_pair(rng, spec.dim)
    else:
        raise InvalidSpec("provide both planted directions or neither")
    a, b = spec.amb_coeffs
    s = spec.sense_coeff
    prompts: list[PromptEncoding] = []
    triples: list[SentenceTriple] = []
    for n in range(spec.n_sentences):
        context = rng.standard_normal(spec.dim)
        context -= (context @ m1) * m1 + (context @ m2) * m2
        if spec.context_scale > 0:
            context = spec.context_scale * context / np.linalg.norm(context)
        else:
            context = np.zeros(spec.dim)
        targets = {
            "amb": a * m1 + b * m2 + context + spec.noise_sigma * rng.standard_normal(spec.dim),
            "s1": s * m1 + context + spec.noise_sigma * rng.standard_normal(spec.dim),
            "s2": s * m2 + context + spec.noise_sigma * rng.standard_normal(spec.dim),
        }
        texts = {
            "amb": f"a synthetic {TARGET_WORD} scene {n}",
            "s1": f"sense one {TARGET_WORD} variant {n}",
            "s2": f"sense two {TARGET_WORD} variant {n}",
        }
        for key in ("amb", "s1", "s2"):
            tokens = tuple(texts[key].split(" "))
            matrix = rng.standard_normal((len(tokens), spec.dim))
            matrix[TARGET_INDEX] = targets[key]
            prompts.append(PromptEncoding(texts[key], tokens, _f32_round(matrix)))
        triples.append(
            SentenceTriple(
                amb=texts["amb"],
                s1=texts["s1"],
                s2=texts["s2"],
                target_word=TARGET_WORD,
                token_index_amb=TARGET_INDEX,
                token_index_s1=TARGET_INDEX,
                token_index_s2=TARGET_INDEX,
            )
        )
    tag = (
        f"synthetic(dim={spec.dim},n={spec.n_sentences},seed={spec.seed},"
        f"sigma={spec.noise_sigma:g},context={spec.context_scale:g})"
    )
    bundle = EmbeddingBundle(tuple(prompts), spec.dim, tag)
    return bundle, triples, SynthTruth(m1=m1, m2=m2, spec=spec)


@dataclass
class RecoveryReport:
    cosine_1: float
    cosine_2: float
    cross_1: float  # |cos| between fitted unit 1 and planted direction 2
    cross_2: float
    swapped: bool
    min_cosine: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(vars(self))


def verify_recovery(
    truth: SynthTruth,
    fitted: tuple[MeaningDirection, MeaningDirection],
    min_cosine: float,
) -> RecoveryReport:
    """Compare fitted unit directions against the planted ones.

    Cosines are reported in absolute value; the global sign of a fitted
    unit is only meaningful in combination with its positive scale.
    """
    d1, d2 = fitted
    for d in (d1, d2):
        if d.unit.shape != truth.m1.shape:
            raise DimensionMismatch(
                f"fitted unit has length {d.unit.shape[0]}, "
                f"truth has {truth.m1.shape[0]}"
            )
    cos1 = abs(float(d1.unit @ truth.m1))
    cos2 = abs(float(d2.unit @ truth.m2))
    cross1 = abs(float(d1.unit @ truth.m2))
    cross2 = abs(float(d2.unit @ truth.m1))
    swapped = cross1 > cos1 and cross2 > cos2
    passed = cos1 >= min_cosine and cos2 >= min_cosine and not swapped
    return RecoveryReport(
        cosine_1=cos1,
        cosine_2=cos2,
        cross_1=cross1,
        cross_2=cross2,
        swapped=swapped,
        min_cosine=min_cosine,
        passed=passed,
    )
