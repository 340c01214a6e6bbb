"""Consistent-histories analysis of finite-dimensional quantum systems."""

from ._core import (
    DomainError,
    Error,
    InconsistentFamilyError,
    IoError,
    ParseError,
    ValidationError,
    collapse_probability,
    consistency,
    decoherence_matrix,
    hpo_negation,
    probabilities,
    run,
    spin_half,
)

__all__ = [
    "DomainError",
    "Error",
    "InconsistentFamilyError",
    "IoError",
    "ParseError",
    "ValidationError",
    "collapse_probability",
    "consistency",
    "decoherence_matrix",
    "hpo_negation",
    "probabilities",
    "run",
    "spin_half",
]
