"""Exception and warning types shared across the package.

Every error carries an ``exit_code`` so the CLI can map failures onto its
exit-code contract: 2 for usage/input problems, 3 for numerical failures.
"""

from __future__ import annotations


class SenseSpaceError(Exception):
    """Base class for all package errors."""

    exit_code = 2


# --- container / file format ---

class MagicMismatch(SenseSpaceError):
    """File does not start with the bundle magic bytes."""


class VersionUnsupported(SenseSpaceError):
    """Bundle container version is not one this reader understands."""


class CorruptPayload(SenseSpaceError):
    """Declared sizes are inconsistent with the file contents."""


class NonFiniteEntry(SenseSpaceError):
    """A matrix contains NaN or infinite entries."""


class IndexOutOfBounds(SenseSpaceError):
    """A prompt or token index is outside the valid range."""


class PromptNotFound(SenseSpaceError):
    """No prompt in the bundle has the requested text."""


class TokenMismatch(SenseSpaceError):
    """The token at a recorded index does not match the target word."""


# --- linear algebra kernel ---

class DimensionMismatch(SenseSpaceError):
    """Operands have incompatible dimensions."""


class EmptyInput(SenseSpaceError):
    """An operation received an empty collection."""


class ZeroVector(SenseSpaceError):
    """A vector required to be nonzero has (numerically) zero norm."""

    exit_code = 3


class NotSymmetric(SenseSpaceError):
    """Matrix is not symmetric within tolerance."""


class NumericalFailure(SenseSpaceError):
    """An iterative numerical procedure failed to converge or produced
    values outside its contract."""

    exit_code = 3


class NearParallel(SenseSpaceError):
    """Two directions are numerically collinear, so no two-dimensional
    basis of their span exists."""

    exit_code = 3


# --- sense fitting ---

class TooFewSentences(SenseSpaceError):
    """Fewer sentence pairs than the fit requires."""


class CollapsedDirection(SenseSpaceError):
    """Deflation annihilated the candidate direction."""

    exit_code = 3


class NonPositiveScale(SenseSpaceError):
    """No own-sense vector projects positively onto the fitted unit, so the
    fit is unusable."""

    exit_code = 3


class DegenerateSpectrum(UserWarning):
    """Fewer than three numerically nonzero eigenvalues: the subspace is
    returned rank-limited instead of at the requested dimension."""


# --- editing / combining ---

class ShapeMismatch(SenseSpaceError):
    """Encoding matrices disagree in shape."""


class WeightsInvalid(SenseSpaceError):
    """Combination weights do not satisfy the sum-to-one constraint."""


# --- statistics ---

class EmptyGroup(SenseSpaceError):
    """A test group contains no observations."""


class NonBinaryOutcome(SenseSpaceError):
    """An outcome value is neither 0 nor 1."""


class ZeroTotal(SenseSpaceError):
    """A count table has zero total, so proportions are undefined."""


class MissingFixture(SenseSpaceError):
    """A bundled or referenced count-table file is absent."""


# --- synthetic generator ---

class InvalidSpec(SenseSpaceError):
    """Synthetic-bundle specification violates its invariants."""
