"""Exception types shared across the toolkit."""


class MocapkinError(Exception):
    """Base class for all library errors."""


class DegenerateRotation(MocapkinError):
    """6D rotation input collapses under orthonormalization."""


class NotARotation(MocapkinError):
    """Matrix is not orthonormal within tolerance."""


class InvalidTemplate(MocapkinError):
    """Body template violates a structural invariant."""


class InvariantViolation(MocapkinError):
    """Loaded data violates a declared invariant."""


class ParseError(MocapkinError):
    """File or stream does not match the documented format."""


class EmptyInput(MocapkinError):
    """Operation received an empty point set or frame list."""


class EmptyScan(MocapkinError):
    """Simulated scan produced zero points."""


class ShapeMismatch(MocapkinError):
    """Array arguments disagree on shape."""


class WindowTooShort(MocapkinError):
    """Temporal window has too few frames for the operation."""


class SequenceTooShort(MocapkinError):
    """Sequence is shorter than the requested window."""


class MissingGradient(MocapkinError):
    """Optimizer step requested before gradients were populated."""


class MissingPrerequisite(MocapkinError):
    """Training stage started without its prerequisite checkpoint."""


class Divergence(MocapkinError):
    """Training loss became non-finite."""


class PlacementFailure(MocapkinError):
    """Object placement rejection sampling exhausted its attempts."""
