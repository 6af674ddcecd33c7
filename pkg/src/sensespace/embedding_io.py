"""Encoder-agnostic interchange container for per-prompt token embeddings.

File layout (single file, little-endian throughout):

    magic   b"SEMB"                          4 bytes
    version u16 (currently 1)                2 bytes
    hlen    u32, byte length of the header   4 bytes
    header  UTF-8 JSON                       hlen bytes
    payload raw float32, row-major           4 * sum(tokens_p) * dim bytes

The header is ``{"encoder_tag": ..., "dim": ..., "prompts": [{"text": ...,
"tokens": [...]}, ...]}`` and the payload concatenates one (tokens x dim)
matrix per prompt in header order. Floats are stored at 32 bits; matrices
are widened to float64 on load so downstream numerics run at 64 bits.

Loaded bundles are immutable (matrices are marked read-only) and safe to
share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CorruptPayload,
    IndexOutOfBounds,
    MagicMismatch,
    NonFiniteEntry,
    PromptNotFound,
    TokenMismatch,
    VersionUnsupported,
)

MAGIC = b"SEMB"
VERSION = 1

# sub-word boundary markers used by common tokenizers, stripped before
# comparing a stored token against the target word
_PREFIX_MARKERS = ("##", "Ġ", "▁")
_SUFFIX_MARKERS = ("</w>",)


@dataclass(frozen=True, eq=False)
class PromptEncoding:
    """One prompt's text, token strings, and (tokens x dim) matrix."""

    text: str
    tokens: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise CorruptPayload(f"encoding matrix must be 2-D, got shape {m.shape}")
        if len(tokens) < 1:
            raise CorruptPayload(f"prompt {self.text!r} has no tokens")
        if m.shape[0] != len(tokens):
            raise CorruptPayload(
                f"prompt {self.text!r}: {m.shape[0]} matrix rows for "
                f"{len(tokens)} tokens"
            )
        if not np.all(np.isfinite(m)):
            raise NonFiniteEntry(f"prompt {self.text!r} has non-finite entries")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class EmbeddingBundle:
    """A set of prompt encodings sharing one embedding width."""

    prompts: tuple[PromptEncoding, ...]
    dim: int
    encoder_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "prompts", tuple(self.prompts))
        if self.dim < 1:
            raise CorruptPayload(f"dim must be positive, got {self.dim}")
        for p in self.prompts:
            if p.dim != self.dim:
                raise CorruptPayload(
                    f"prompt {p.text!r} has width {p.dim}, bundle declares {self.dim}"
                )

    def index_of(self, text: str) -> int:
        """Index of the prompt whose text equals ``text`` exactly."""
        for i, p in enumerate(self.prompts):
            if p.text == text:
                return i
        raise PromptNotFound(f"no prompt with text {text!r}")


@dataclass(frozen=True)
class SentenceTriple:
    """An ambiguous prompt with its two sense-disambiguated variants.

    Token indices are zero-based positions of the target word's token in
    each prompt and are produced by whatever exported the bundle; this
    module never re-tokenizes.
    """

    amb: str
    s1: str
    s2: str
    target_word: str
    token_index_amb: int
    token_index_s1: int
    token_index_s2: int


def normalize_token(token: str) -> str:
    """Case-fold a token and strip common tokenizer boundary markers."""
    for m in _PREFIX_MARKERS:
        if token.startswith(m):
            token = token[len(m):]
    for m in _SUFFIX_MARKERS:
        if token.endswith(m):
            token = token[: -len(m)]
    return token.casefold()


def token_matches_word(token: str, word: str) -> bool:
    """Whether a stored token plausibly belongs to the target word.

    Accepts the whole word or a contiguous piece of it (sub-word token),
    case-folded and with common tokenizer boundary markers stripped.
    """
    t = normalize_token(token)
    w = word.casefold()
    return bool(t) and (t == w or t in w)


def save_bundle(path, bundle: EmbeddingBundle) -> None:
    """Write a bundle. Payload floats are truncated to 32 bits."""
    header = {
        "encoder_tag": bundle.encoder_tag,
        "dim": bundle.dim,
        "prompts": [
            {"text": p.text, "tokens": list(p.tokens)} for p in bundle.prompts
        ],
    }
    hbytes = json.dumps(header, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(hbytes)))
        fh.write(hbytes)
        for p in bundle.prompts:
            fh.write(np.ascontiguousarray(p.matrix, dtype="<f4").tobytes())


def load_bundle(path) -> EmbeddingBundle:
    """Read a bundle file, validating structure, sizes, and finiteness."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise MagicMismatch(f"{path}: not a bundle file (bad magic)")
    if len(raw) < 10:
        raise CorruptPayload(f"{path}: truncated before header length")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != VERSION:
        raise VersionUnsupported(f"{path}: container version {version}, expected {VERSION}")
    (hlen,) = struct.unpack_from("<I", raw, 6)
    if len(raw) < 10 + hlen:
        raise CorruptPayload(f"{path}: header declared {hlen} bytes, file too short")
    try:
        header = json.loads(raw[10 : 10 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"{path}: header is not valid JSON ({exc})") from exc
    try:
        dim = int(header["dim"])
        encoder_tag = str(header["encoder_tag"])
        prompt_meta = [
            (str(p["text"]), [str(t) for t in p["tokens"]]) for p in header["prompts"]
        ]
    except (KeyError, TypeError) as exc:
        raise CorruptPayload(f"{path}: header schema invalid ({exc})") from exc
    if dim < 1:
        raise CorruptPayload(f"{path}: dim must be positive, got {dim}")
    expected = sum(len(tokens) for _, tokens in prompt_meta) * dim * 4
    payload = raw[10 + hlen :]
    if len(payload) != expected:
        raise CorruptPayload(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f4")
    prompts = []
    offset = 0
    for text, tokens in prompt_meta:
        count = len(tokens) * dim
        block = flat[offset : offset + count].astype(np.float64)
        offset += count
        if not np.all(np.isfinite(block)):
            raise NonFiniteEntry(f"{path}: prompt {text!r} has non-finite entries")
        prompts.append(PromptEncoding(text, tuple(tokens), block.reshape(len(tokens), dim)))
    return EmbeddingBundle(tuple(prompts), dim, encoder_tag)


def extract_token_vector(bundle: EmbeddingBundle, prompt_index: int, token_index: int) -> np.ndarray:
    """Copy of one token's embedding row."""
    if not (0 <= prompt_index < len(bundle.prompts)):
        raise IndexOutOfBounds(
            f"prompt index {prompt_index} out of range [0, {len(bundle.prompts)})"
        )
    p = bundle.prompts[prompt_index]
    if not (0 <= token_index < len(p.tokens)):
        raise IndexOutOfBounds(
            f"token index {token_index} out of range [0, {len(p.tokens)}) "
            f"for prompt {p.text!r}"
        )
    return p.matrix[token_index].copy()


def extract_triple_vectors(
    bundle: EmbeddingBundle, triple: SentenceTriple
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Target-word vectors (ambiguous, sense-1, sense-2) for one triple.

    Prompts are matched by exact text. For a multi-token target word, call
    once per sub-token index with one triple per sub-token.
    """
    out = []
    for text, idx in (
        (triple.amb, triple.token_index_amb),
        (triple.s1, triple.token_index_s1),
        (triple.s2, triple.token_index_s2),
    ):
        pi = bundle.index_of(text)
        vec = extract_token_vector(bundle, pi, idx)
        token = bundle.prompts[pi].tokens[idx]
        if not token_matches_word(token, triple.target_word):
            raise TokenMismatch(
                f"prompt {text!r}: token {token!r} at index {idx} does not "
                f"match target word {triple.target_word!r}"
            )
        out.append(vec)
    return out[0], out[1], out[2]


# --- triple files: a JSON array of objects ---

_TRIPLE_KEYS = (
    "amb",
    "s1",
    "s2",
    "target_word",
    "token_index_amb",
    "token_index_s1",
    "token_index_s2",
)


def load_triples(path) -> list[SentenceTriple]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise CorruptPayload(f"{path}: triple file must hold a JSON array")
    triples = []
    for i, entry in enumerate(data):
        try:
            triples.append(
                SentenceTriple(
                    amb=str(entry["amb"]),
                    s1=str(entry["s1"]),
                    s2=str(entry["s2"]),
                    target_word=str(entry["target_word"]),
                    token_index_amb=int(entry["token_index_amb"]),
                    token_index_s1=int(entry["token_index_s1"]),
                    token_index_s2=int(entry["token_index_s2"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptPayload(f"{path}: entry {i} invalid ({exc})") from exc
    return triples


def save_triples(path, triples) -> None:
    data = [{k: getattr(t, k) for k in _TRIPLE_KEYS} for t in triples]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
