"""K-sweep of Monte Carlo ruin estimates against the asymptotic limit."""

import logging
import math
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator
from tqdm import tqdm

from errors import OutputPathError
from model_core import (
    ModelParams,
    ScaleParams,
    asymptotic_exponent,
    gaussian_lower_bound,
    normalized_log,
)
from montecarlo import Scheme, SimConfig, estimate_ruin
from montecarlo.models import DEFAULT_BLOCK_SIZE, DEFAULT_N_STEPS
from transformer import check_output_dir, models_to_dataframe, read_csv, write_csv

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["K", "p_hat", "stderr", "normalized_log", "limit_value", "gaussian_lb", "scheme"]


class SweepSpec(BaseModel):
    """Parameters of a sweep over initial conditions K."""

    model_config = ConfigDict(frozen=True)

    params: ModelParams
    K_list: list[float] = Field(..., min_length=1, description="Initial conditions, increasing")
    scheme: Scheme = Field(Scheme.LAMPERTI, description="Simulation scheme")
    n_paths: int = Field(..., ge=1, description="Paths per K")
    n_steps: int = Field(DEFAULT_N_STEPS, ge=1, description="Time steps per path")
    seed: int = Field(..., ge=0, lt=2**64, description="Root seed, shared by every K")
    importance_sampling: bool = Field(False, description="Tilt the drift along w*")
    output_path: Optional[Path] = Field(None, description="CSV destination")
    block_size: int = Field(DEFAULT_BLOCK_SIZE, ge=1, description="Paths per RNG block")

    @field_validator("K_list")
    @classmethod
    def _increasing(cls, values: list[float]) -> list[float]:
        if any(k <= 0 or not math.isfinite(k) for k in values):
            raise ValueError("K_list entries must be positive and finite")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("K_list must be strictly increasing")
        return values

    def sim_config(self, K: float) -> SimConfig:
        return SimConfig(
            params=self.params,
            scale=ScaleParams.for_params(self.params, K),
            scheme=self.scheme,
            n_steps=self.n_steps,
            n_paths=self.n_paths,
            seed=self.seed,
            importance_sampling=self.importance_sampling,
            block_size=self.block_size,
        )


class SweepRow(BaseModel):
    """One K of the sweep."""

    K: float
    p_hat: float
    stderr: float
    normalized_log: Optional[float] = Field(None, description="log(p_hat)/K^{2(1-gamma)}, None when p_hat = 0")
    limit_value: float = Field(..., description="-asymptotic_exponent")
    gaussian_lb: float
    scheme: Scheme

    @property
    def flagged(self) -> bool:
        return self.normalized_log is None

    @property
    def deviation(self) -> Optional[float]:
        if self.normalized_log is None:
            return None
        return abs(self.normalized_log - self.limit_value)


class SweepSummary(BaseModel):
    """Sweep rows with the limit recomputed from the model whenever loaded."""

    params: ModelParams
    scheme: Scheme
    seed: int
    rows: list[SweepRow]

    @computed_field
    @property
    def asymptotic_exponent(self) -> float:
        return asymptotic_exponent(self.params)

    @computed_field
    @property
    def limit_value(self) -> float:
        return -asymptotic_exponent(self.params)

    @computed_field
    @property
    def max_abs_deviation_top_half(self) -> Optional[float]:
        """Largest |normalized_log - limit| over the upper half of K_list."""
        top = self.rows[len(self.rows) // 2:]
        deviations = [abs(r.normalized_log - self.limit_value) for r in top if r.normalized_log is not None]
        return max(deviations) if deviations else None


def sweep_row(spec: SweepSpec, K: float, workers: int = 1) -> SweepRow:
    """Estimate one row of the sweep."""
    config = spec.sim_config(K)
    estimate = estimate_ruin(config, workers=workers)
    value = normalized_log(estimate.p_hat, config.scale)
    if value is None:
        logger.warning("K=%g: no ruined paths in %d, normalized_log undefined", K, estimate.n_paths)
    return SweepRow(
        K=K,
        p_hat=estimate.p_hat,
        stderr=estimate.stderr,
        normalized_log=value,
        limit_value=-asymptotic_exponent(spec.params),
        gaussian_lb=gaussian_lower_bound(spec.params, config.scale),
        scheme=spec.scheme,
    )


def run_sweep(spec: SweepSpec, workers: int = 1, progress: bool = False) -> list[SweepRow]:
    """Estimate the ruin probability for every K of the sweep.

    K values run one after another; each estimate may use several workers.
    When spec.output_path is set the rows are written as CSV and a JSON
    summary is written next to it.

    Args:
        spec: Sweep specification
        workers: Threads per estimate
        progress: Show a progress bar

    Returns:
        One SweepRow per K, in K_list order
    """
    check_output_dir(spec.output_path)

    rows = [
        sweep_row(spec, K, workers)
        for K in tqdm(spec.K_list, desc="sweep", unit="K", disable=not progress)
    ]

    if spec.output_path is not None:
        write_sweep_csv(rows, spec.output_path)
        write_summary(summarize(spec, rows), summary_path(spec.output_path))
    return rows


def write_sweep_csv(rows: list[SweepRow], path: Path) -> None:
    """Write rows with header K,p_hat,stderr,normalized_log,limit_value,gaussian_lb,scheme."""
    df = models_to_dataframe(rows, SWEEP_COLUMNS)
    df["scheme"] = [row.scheme.value for row in rows]
    write_csv(df, path)


def read_sweep_csv(path: Path) -> list[SweepRow]:
    """Parse a sweep CSV back into rows; nan normalized logs become None."""
    df = read_csv(path, SWEEP_COLUMNS)
    df = df.astype(object).where(df.notna(), None)
    return [SweepRow.model_validate(record) for record in df.to_dict(orient="records")]


def summarize(spec: SweepSpec, rows: list[SweepRow]) -> SweepSummary:
    return SweepSummary(params=spec.params, scheme=spec.scheme, seed=spec.seed, rows=rows)


def summary_path(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_summary(summary: SweepSummary, path: Path) -> None:
    """Write the JSON summary (UTF-8); normalized_log of flagged rows is null."""
    check_output_dir(path)
    try:
        Path(path).write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputPathError(path, str(e)) from e


def load_summary(path: Path) -> SweepSummary:
    """Read a JSON summary; limit_value is recomputed from the stored params."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise OutputPathError(path, str(e)) from e
    return SweepSummary.model_validate_json(text)
