"""Transductive online learning laboratory.

Finite hypothesis classes, their combinatorial dimensions, the learner and
adversary strategies of the transductive mistake-bound game, and an exact
minimax oracle for the game value.
"""

from .errors import BudgetExceeded, ContractViolation, ProtocolViolation
from .hypothesis import (
    HypothesisClass,
    LabeledSequence,
    VersionSpace,
    evaluate,
    filter_version_space,
    is_realizable,
    label_counts,
    read_hyp,
    restrict,
    write_hyp,
)

__all__ = [
    "BudgetExceeded",
    "ContractViolation",
    "ProtocolViolation",
    "HypothesisClass",
    "LabeledSequence",
    "VersionSpace",
    "evaluate",
    "filter_version_space",
    "is_realizable",
    "label_counts",
    "read_hyp",
    "restrict",
    "write_hyp",
]

__version__ = "0.1.0"
