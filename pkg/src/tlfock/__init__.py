"""Temperley-Lieb subproduct systems: Fock-space operators and numerical checks."""
from .chain import Chain, build_chain
from .errors import InputError, TLFockError
from .tlpoly import TLData, anti_diagonal_matrix, dagger, q_family, tl_validate

__all__ = [
    "Chain",
    "InputError",
    "TLData",
    "TLFockError",
    "anti_diagonal_matrix",
    "build_chain",
    "dagger",
    "q_family",
    "tl_validate",
]
