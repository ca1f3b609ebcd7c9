"""Configuration and result models for ruin simulation."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from model_core import ModelParams, ScaleParams

DEFAULT_N_STEPS = 4000
DEFAULT_BLOCK_SIZE = 4096


class Scheme(str, Enum):
    """Path simulation scheme."""

    EULER_FULL_TRUNCATION = "euler_full_truncation"
    LAMPERTI = "lamperti"
    EXACT_CIR = "exact_cir"


class SimConfig(BaseModel):
    """Everything that determines a Monte Carlo run bit for bit."""

    model_config = ConfigDict(frozen=True)

    params: ModelParams
    scale: ScaleParams
    scheme: Scheme = Field(Scheme.LAMPERTI, description="Simulation scheme")
    n_steps: int = Field(DEFAULT_N_STEPS, ge=1, description="Time steps per path")
    n_paths: int = Field(..., ge=1, description="Number of sample paths")
    seed: int = Field(..., ge=0, lt=2**64, description="Root seed of the block streams")
    importance_sampling: bool = Field(False, description="Tilt the drift along w*")
    block_size: int = Field(
        DEFAULT_BLOCK_SIZE, ge=1, description="Paths per RNG block; fixes the stream partition"
    )

    @model_validator(mode="after")
    def _scale_matches_model(self) -> "SimConfig":
        if self.scale.gamma != self.params.gamma:
            raise ValueError(
                f"scale gamma {self.scale.gamma} differs from model gamma {self.params.gamma}"
            )
        return self

    @property
    def dt(self) -> float:
        return self.params.horizon_T / self.n_steps


class RuinEstimate(BaseModel):
    """Estimate of P(tau_0 <= T) with its sampling error."""

    p_hat: float = Field(..., ge=0, description="Estimated ruin probability")
    stderr: float = Field(..., ge=0, description="Standard error of p_hat")
    n_paths: int = Field(..., ge=0, description="Number of sample paths")
    scheme: Scheme
    seed: int
    elapsed: float = Field(..., ge=0, description="Wall-clock seconds")

    def confidence_interval(self, z: float = 1.96) -> tuple[float, float]:
        """Normal-approximation interval clipped to [0, 1]."""
        return max(0.0, self.p_hat - z * self.stderr), min(1.0, self.p_hat + z * self.stderr)

    @property
    def relative_stderr(self) -> float:
        if self.p_hat == 0:
            return math.inf
        return self.stderr / self.p_hat


@dataclass(frozen=True)
class PathOutcome:
    """Result of simulating one path."""

    ruined: bool
    tau0: Optional[float]
    terminal_value: float


@dataclass
class BlockTally:
    """Sufficient statistics of one block of paths; merged in block order."""

    count: int = 0
    hits: int = 0
    weight_sum: float = 0.0
    weight_sq_sum: float = 0.0
    violations: int = 0
    ties: int = 0
    martingale_events: int = 0

    def merge(self, other: "BlockTally") -> "BlockTally":
        return BlockTally(
            count=self.count + other.count,
            hits=self.hits + other.hits,
            weight_sum=self.weight_sum + other.weight_sum,
            weight_sq_sum=self.weight_sq_sum + other.weight_sq_sum,
            violations=self.violations + other.violations,
            ties=self.ties + other.ties,
            martingale_events=self.martingale_events + other.martingale_events,
        )
