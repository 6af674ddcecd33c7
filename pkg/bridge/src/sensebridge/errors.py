"""Bridge-specific errors, sharing the core package's base class so the
CLI exit-code mapping carries over."""

from __future__ import annotations

from sensespace.errors import SenseSpaceError, ShapeMismatch  # noqa: F401


class EncoderUnavailable(SenseSpaceError):
    """The requested text encoder cannot be loaded in this environment."""


class TokenizationOverflow(SenseSpaceError):
    """A prompt tokenizes beyond the fixed padded length."""


class TargetTokenNotFound(SenseSpaceError):
    """A triple's target word does not occur in its prompt."""


class ResourceUnavailable(SenseSpaceError):
    """The diffusion pipeline or its weights cannot be loaded."""
