"""Text encoders producing per-token embedding matrices at a fixed padded
length.

Two encoders are provided, selected by an identifier string:

* ``hash:<dim>``: a deterministic offline reference encoder. Tokens are
  whitespace words; each token's vector is seeded from a hash of its
  string plus a small position-dependent term. It has no semantics, but
  it exercises the full export path (padding, index recording, bundle
  validation) without any model weights.
* ``clip:<model-id-or-path>``: a CLIP text encoder via ``transformers``.
  Matrices are the final hidden states over the padded token sequence
  (begin/end markers included), which is exactly what conditions
  cross-attention in the diffusion pipelines this bridge targets.

Every encoder reports, per prompt, the token span of each whitespace
word, so the exporter can record target-word token indices without
string heuristics.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import EncoderUnavailable, TokenizationOverflow

HASH_DEFAULT_PAD = 16
CLIP_DEFAULT_PAD = 77

#: scale of the position-dependent part of the hash encoder's vectors
_POSITION_SCALE = 0.05


@dataclass(frozen=True)
class WordSpan:
    """Token span of one whitespace word: tokens[start:start+count]."""

    word: str
    start: int
    count: int


@dataclass(frozen=True)
class EncodedPrompt:
    text: str
    tokens: tuple[str, ...]
    matrix: np.ndarray  # (pad_length, dim), float64 holding float32 values
    word_spans: tuple[WordSpan, ...]


def _hash_rng(key: str) -> np.random.Generator:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))


class HashEncoder:
    """Deterministic stand-in encoder: one token per whitespace word."""

    pad_token = "<pad>"

    def __init__(self, dim: int, pad_length: int = HASH_DEFAULT_PAD):
        if dim < 1:
            raise EncoderUnavailable(f"hash encoder dim must be positive, got {dim}")
        self.dim = dim
        self.pad_length = pad_length

    @property
    def tag(self) -> str:
        return f"hash:{self.dim}"

    def _vector(self, token: str, position: int) -> np.ndarray:
        base = _hash_rng(f"tok:{token}").standard_normal(self.dim)
        drift = _hash_rng(f"pos:{position}").standard_normal(self.dim)
        return base + _POSITION_SCALE * drift

    def encode(self, texts) -> list[EncodedPrompt]:
        out = []
        for text in texts:
            words = text.split()
            if len(words) > self.pad_length:
                raise TokenizationOverflow(
                    f"prompt has {len(words)} tokens, padded length is {self.pad_length}"
                )
            tokens = list(words) + [self.pad_token] * (self.pad_length - len(words))
            matrix = np.stack([self._vector(t, i) for i, t in enumerate(tokens)])
            matrix = matrix.astype(np.float32).astype(np.float64)
            spans = tuple(WordSpan(w, i, 1) for i, w in enumerate(words))
            out.append(EncodedPrompt(text, tuple(tokens), matrix, spans))
        return out


class ClipEncoder:
    """CLIP text encoder: final hidden states at fixed padded length.

    Prompts are segmented into whitespace words and each word is run
    through the tokenizer's subword split, so the word-to-token spans are
    known exactly (multi-token words get multi-token spans).
    """

    def __init__(self, tokenizer, model, name: str, pad_length: int | None = None):
        self._tokenizer = tokenizer
        self._model = model.eval()
        self._name = name
        limit = int(model.config.max_position_embeddings)
        self.pad_length = min(pad_length or CLIP_DEFAULT_PAD, limit)
        self.dim = int(model.config.hidden_size)

    @property
    def tag(self) -> str:
        return f"clip:{self._name}"

    @classmethod
    def load(cls, name: str, pad_length: int | None = None) -> "ClipEncoder":
        try:
            from transformers import CLIPTextModel, CLIPTokenizer
        except ImportError as exc:
            raise EncoderUnavailable(
                f"transformers/torch are not installed: {exc}"
            ) from exc
        try:
            tokenizer = CLIPTokenizer.from_pretrained(name)
            model = CLIPTextModel.from_pretrained(name)
        except Exception as exc:
            raise EncoderUnavailable(f"cannot load encoder {name!r}: {exc}") from exc
        return cls(tokenizer, model, name, pad_length)

    def encode(self, texts) -> list[EncodedPrompt]:
        import torch

        tok = self._tokenizer
        out = []
        for text in texts:
            words = text.split()
            spans = []
            stream: list[str] = []
            for word in words:
                pieces = tok.tokenize(word)
                spans.append(WordSpan(word, 1 + len(stream), len(pieces)))
                stream.extend(pieces)
            if len(stream) + 2 > self.pad_length:
                raise TokenizationOverflow(
                    f"prompt tokenizes to {len(stream) + 2} positions, "
                    f"padded length is {self.pad_length}"
                )
            n_pad = self.pad_length - len(stream) - 2
            tokens = (
                [tok.bos_token] + stream + [tok.eos_token] + [tok.pad_token] * n_pad
            )
            ids = tok.convert_tokens_to_ids(tokens)
            with torch.no_grad():
                hidden = self._model(input_ids=torch.tensor([ids])).last_hidden_state
            matrix = hidden[0].numpy().astype(np.float64)
            out.append(EncodedPrompt(text, tuple(tokens), matrix, tuple(spans)))
        return out


def make_encoder(spec: str, pad_length: int | None = None):
    """Build an encoder from an identifier like ``hash:64`` or
    ``clip:openai/clip-vit-large-patch14``."""
    kind, _, rest = spec.partition(":")
    if kind == "hash":
        try:
            dim = int(rest)
        except ValueError:
            raise EncoderUnavailable(f"bad hash encoder spec {spec!r}, want hash:<dim>")
        return HashEncoder(dim, pad_length or HASH_DEFAULT_PAD)
    if kind == "clip":
        if not rest:
            raise EncoderUnavailable("clip encoder spec needs a model id or path")
        return ClipEncoder.load(rest, pad_length)
    raise EncoderUnavailable(f"unknown encoder kind {kind!r} in {spec!r}")
