"""Exact computations with finite p-groups, Schur sigma-groups and their measures."""

from .errors import BudgetExceeded, NotNormalError, PresentationError, ValidationError
from .pcgroup import PcGroup, Subgroup, abelian_invariants

__all__ = [
    "BudgetExceeded",
    "NotNormalError",
    "PcGroup",
    "PresentationError",
    "Subgroup",
    "ValidationError",
    "abelian_invariants",
]

__version__ = "0.1.0"
