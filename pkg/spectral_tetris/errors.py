"""
Exception hierarchy for spectral tetris constructions.

Every error raised on purpose by the package derives from SpectralTetrisError,
so callers (and the CLI) can tell validation problems apart from bugs.
"""

from typing import Optional, Sequence


class SpectralTetrisError(Exception):
    """Base class for all errors raised by the package."""


class SpectrumError(SpectralTetrisError, ValueError):
    """An eigenvalue sequence is malformed or outside an algorithm's domain."""


class BlockError(SpectralTetrisError, ValueError):
    """A building block cannot be formed with the requested parameters."""


class ConstructionError(SpectralTetrisError):
    """A constructor could not complete the synthesis matrix."""


class PartitionError(SpectralTetrisError, ValueError):
    """A grouping of frame vectors is not a partition of the columns."""


class DocumentError(SpectralTetrisError, ValueError):
    """A serialized frame could not be read or written."""


class InvariantViolation(SpectralTetrisError, AssertionError):
    """A property that the construction guarantees was found to be false."""


class MajorizationFailed(SpectralTetrisError):
    """The requested subspace dimensions are not majorized by the reference ones.

    When ``certified`` is True (tight spectrum, M >= 2N) no spectral tetris
    fusion frame with these dimensions exists at all. Otherwise the failure
    only means the rebalancing method cannot build one.
    """

    def __init__(
        self,
        reference_dims: Sequence[int],
        dims: Sequence[int],
        certified: bool,
        message: Optional[str] = None,
    ):
        self.reference_dims = tuple(reference_dims)
        self.dims = tuple(dims)
        self.certified = certified
        if message is None:
            reason = (
                "no spectral tetris fusion frame with these dimensions exists"
                if certified
                else "not constructible by this method"
            )
            message = (
                f"reference dimensions {list(self.reference_dims)} do not majorize "
                f"{list(self.dims)}: {reason}"
            )
        super().__init__(message)
