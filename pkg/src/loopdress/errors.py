"""Exception hierarchy shared by every module."""


class LoopDressError(Exception):
    """Base class for all library errors."""


class DomainError(LoopDressError, ValueError):
    """Input lies outside the set an operation is defined on."""


class InvertibilityError(LoopDressError, ArithmeticError):
    """A matrix or loop that must be invertible is singular."""


class ConditioningError(LoopDressError, ArithmeticError):
    """A sampled value or linear system is too ill-conditioned to trust."""


class TruncationError(LoopDressError, ArithmeticError):
    """Discarded Laurent mass exceeds the allowed budget."""

    def __init__(self, message, discarded=None):
        super().__init__(message)
        self.discarded = discarded


class NonConvergenceError(LoopDressError, ArithmeticError):
    """An iteration failed to reach its tolerance; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class RankAmbiguityError(LoopDressError, ArithmeticError):
    """Singular values fall inside the gray band around the rank threshold."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class TwistError(DomainError):
    """A loop violates the twisting condition."""


class NotVacuumError(DomainError):
    """The element is not semisimple, so no vacuum normalization exists."""


class IndeterminateError(LoopDressError, ArithmeticError):
    """A classification fell in its gray band."""


class ConfigurationError(LoopDressError, ValueError):
    """Invalid configuration, e.g. a truncation too small for the requested band."""


class SchemaError(LoopDressError, ValueError):
    """Malformed serialized input."""


class UnsupportedVersionError(SchemaError):
    """Serialized input carries an unknown format version."""


class StructuralError(LoopDressError, ArithmeticError):
    """A computed object fails a structural identity it must satisfy."""


class InvariantDriftError(LoopDressError, ArithmeticError):
    """A conserved quantity drifted beyond tolerance during integration."""
