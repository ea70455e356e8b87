"""Numerical loop groups: Iwasawa-type factorization, extended framings,
dressing, vacua and their orbits, Killing fields, commuting flows and
uniton-number tests."""
from .errors import (
    ConditioningError,
    DomainError,
    LoopDressError,
    NonConvergenceError,
    SchemaError,
    TwistError,
)
from .factorization import (
    DressingElement,
    ExtendedFraming,
    FactorPath,
    dress_framing,
    factor_group,
    framing_residuals,
    gauge_equivalent,
    split_algebra,
    symes_framing,
    vacuum_framing,
    vacuum_framing_grid,
)
from .lie import PRESETS, GradedLieAlgebra, centralizer, classify_element, sigma
from .loops import LoopContext, LoopElement, check_symmetries, exp_loop, invert, tail_norm

__version__ = "0.1.0"

__all__ = [
    "ConditioningError", "DomainError", "LoopDressError", "NonConvergenceError", "SchemaError", "TwistError",
    "DressingElement", "ExtendedFraming", "FactorPath", "dress_framing", "factor_group", "framing_residuals",
    "gauge_equivalent", "split_algebra", "symes_framing", "vacuum_framing", "vacuum_framing_grid",
    "PRESETS", "GradedLieAlgebra", "centralizer", "classify_element", "sigma",
    "LoopContext", "LoopElement", "check_symmetries", "exp_loop", "invert", "tail_norm",
]
