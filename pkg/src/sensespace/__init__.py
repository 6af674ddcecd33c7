"""Sense superposition toolkit.

Contextual text encoders represent a polysemous word's token as an
approximately linear mixture of per-sense directions. This package fits
those directions from sentence triples, edits prompt encodings so one
sense dominates, combines encodings by weighted sum, and runs the
counting statistics used to evaluate the effect on generated images. A
built-in synthetic generator with planted directions serves as the
ground-truth oracle for the whole chain.
"""

from .embedding_io import (
    EmbeddingBundle,
    PromptEncoding,
    SentenceTriple,
    extract_token_vector,
    extract_triple_vectors,
    load_bundle,
    load_triples,
    save_bundle,
    save_triples,
)
from .sense_space import (
    DifferenceSubspace,
    FitReport,
    MeaningDirection,
    build_difference_subspace,
    estimate_direction,
    fit_senses,
    load_directions,
    save_directions,
)
from .sense_edit import (
    SenseEditOutcome,
    combine_encodings,
    edit_prompt,
    edit_sense,
)
from .stats import (
    CountTable,
    PermutationResult,
    pair_significance_suite,
    permutation_test,
    proportions_report,
    read_counts_csv,
    significance_suite,
    write_counts_csv,
)
from .synth import (
    RecoveryReport,
    SynthSpec,
    SynthTruth,
    generate_synthetic,
    verify_recovery,
)

__version__ = "0.1.0"

__all__ = [
    "EmbeddingBundle",
    "PromptEncoding",
    "SentenceTriple",
    "extract_token_vector",
    "extract_triple_vectors",
    "load_bundle",
    "load_triples",
    "save_bundle",
    "save_triples",
    "DifferenceSubspace",
    "FitReport",
    "MeaningDirection",
    "build_difference_subspace",
    "estimate_direction",
    "fit_senses",
    "load_directions",
    "save_directions",
    "SenseEditOutcome",
    "combine_encodings",
    "edit_prompt",
    "edit_sense",
    "CountTable",
    "PermutationResult",
    "pair_significance_suite",
    "permutation_test",
    "proportions_report",
    "read_counts_csv",
    "significance_suite",
    "write_counts_csv",
    "RecoveryReport",
    "SynthSpec",
    "SynthTruth",
    "generate_synthetic",
    "verify_recovery",
]
