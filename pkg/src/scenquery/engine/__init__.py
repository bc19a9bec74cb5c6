from .membership import (
    MatchQuery,
    MatchResult,
    backend_info,
    initial_config,
    load_pure_stepper,
    match_length,
    membership,
    resimulate,
    step,
)
from .oracle import TreeSimulator, membership_oracle

__all__ = [
    "MatchQuery",
    "MatchResult",
    "TreeSimulator",
    "backend_info",
    "initial_config",
    "load_pure_stepper",
    "match_length",
    "membership",
    "membership_oracle",
    "resimulate",
    "step",
]
