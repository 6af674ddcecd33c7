"""Export prompts or sentence triples into the core bundle format.

The exporter owns tokenization: it records the token index of each
triple's target word from the encoder's word spans and writes an updated
triples file alongside the bundle. Every written bundle is re-read with
the core loader, so only files that pass core validation leave this
module.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from pathlib import Path

from sensespace import (
    EmbeddingBundle,
    PromptEncoding,
    SentenceTriple,
    extract_triple_vectors,
    load_bundle,
    load_triples,
    save_bundle,
    save_triples,
)

from .encoders import EncodedPrompt, make_encoder
from .errors import TargetTokenNotFound

_PUNCT = str.maketrans("", "", string.punctuation)


@dataclass
class ExportJob:
    """What to encode and where to put it.

    Exactly one of ``prompts`` or ``triples_path`` must be given; the
    triples form requires ``out_triples`` for the reindexed copy.
    """

    encoder: str
    out_bundle: str | Path
    prompts: list[str] | None = None
    triples_path: str | Path | None = None
    out_triples: str | Path | None = None
    padding_length: int | None = None
    layer_tag: str = "final_hidden"


def _word_key(word: str) -> str:
    return word.translate(_PUNCT).casefold()


def target_token_index(encoded: EncodedPrompt, target_word: str) -> int:
    """Token index of a prompt's target word (first sub-token).

    When the word occurs more than once the last occurrence wins, since
    disambiguating modifiers precede the word of interest. Multi-token
    words point at their first sub-token; downstream editing can expand
    the span via the word's remaining positions.
    """
    key = _word_key(target_word)
    hits = [s for s in encoded.word_spans if _word_key(s.word) == key]
    if not hits:
        raise TargetTokenNotFound(
            f"target word {target_word!r} not found in prompt {encoded.text!r}"
        )
    return hits[-1].start


def export_embeddings(job: ExportJob) -> EmbeddingBundle:
    """Encode, write the bundle (and reindexed triples), and validate."""
    if (job.prompts is None) == (job.triples_path is None):
        raise ValueError("give exactly one of prompts or triples_path")
    triples: list[SentenceTriple] = []
    if job.triples_path is not None:
        if job.out_triples is None:
            raise ValueError("triples export needs out_triples for the reindexed copy")
        triples = load_triples(job.triples_path)
        texts: list[str] = []
        for t in triples:
            for text in (t.amb, t.s1, t.s2):
                if text not in texts:
                    texts.append(text)
    else:
        texts = list(job.prompts)

    encoder = make_encoder(job.encoder, job.padding_length)
    encoded = encoder.encode(texts)
    by_text = {e.text: e for e in encoded}
    prompts = tuple(PromptEncoding(e.text, e.tokens, e.matrix) for e in encoded)
    tag = f"{encoder.tag}|layer={job.layer_tag}|pad={encoder.pad_length}"
    bundle = EmbeddingBundle(prompts, encoder.dim, tag)
    save_bundle(job.out_bundle, bundle)
    validated = load_bundle(job.out_bundle)

    if triples:
        reindexed = [
            SentenceTriple(
                amb=t.amb,
                s1=t.s1,
                s2=t.s2,
                target_word=t.target_word,
                token_index_amb=target_token_index(by_text[t.amb], t.target_word),
                token_index_s1=target_token_index(by_text[t.s1], t.target_word),
                token_index_s2=target_token_index(by_text[t.s2], t.target_word),
            )
            for t in triples
        ]
        for t in reindexed:
            extract_triple_vectors(validated, t)  # must resolve before we ship it
        save_triples(job.out_triples, reindexed)
    return validated
