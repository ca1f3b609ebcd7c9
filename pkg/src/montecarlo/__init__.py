"""
Monte Carlo estimation of CEV ruin probabilities.

Paths are simulated in fixed-size blocks, each with its own Philox stream,
so estimates depend only on the configuration and never on the worker count.
"""

from montecarlo.engine import (
    coupled_inclusion_check,
    estimate_ruin,
    estimate_ruin_is,
    export_paths,
    inclusion_tally,
    is_tilt,
    ruin_path_profile,
    simulate_path,
)
from montecarlo.models import BlockTally, PathOutcome, RuinEstimate, Scheme, SimConfig
from montecarlo.streams import block_generator, block_ranges

__all__ = [
    "BlockTally",
    "PathOutcome",
    "RuinEstimate",
    "Scheme",
    "SimConfig",
    "block_generator",
    "block_ranges",
    "coupled_inclusion_check",
    "estimate_ruin",
    "estimate_ruin_is",
    "export_paths",
    "inclusion_tally",
    "is_tilt",
    "ruin_path_profile",
    "simulate_path",
]
