"""Bridge between real text encoders / diffusion pipelines and the
sensespace bundle format."""

from .encoders import ClipEncoder, EncodedPrompt, HashEncoder, WordSpan, make_encoder
from .export import ExportJob, export_embeddings, target_token_index
from .generate import (
    DiffusersPipeline,
    conditioning_matches_native,
    encoding_digest,
    generate_images,
    load_diffusion_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "ClipEncoder",
    "EncodedPrompt",
    "HashEncoder",
    "WordSpan",
    "make_encoder",
    "ExportJob",
    "export_embeddings",
    "target_token_index",
    "DiffusersPipeline",
    "conditioning_matches_native",
    "encoding_digest",
    "generate_images",
    "load_diffusion_pipeline",
]
