"""Monte Carlo ruin estimation on independent blocks of paths."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from typing import Callable, Optional, TypeVar

import numpy as np
import pandas as pd

from errors import DomainError, UnsupportedCaseError
from model_core import normalize
from montecarlo.models import BlockTally, PathOutcome, RuinEstimate, Scheme, SimConfig
from montecarlo.schemes import BlockPaths, simulate_exact_block, simulate_gaussian_block
from montecarlo.streams import block_generator, block_ranges
from rate_function import most_likely_path_values, optimal_control_values

logger = logging.getLogger(__name__)

DEFAULT_PROFILE_POINTS = 200

R = TypeVar("R")


def _map_blocks(config: SimConfig, task: Callable[[int, int], R], workers: int) -> list[R]:
    """Run task(block_index, n) for every block; results come back in block order."""
    jobs = [
        (index, stop - start)
        for index, (start, stop) in enumerate(block_ranges(config.n_paths, config.block_size))
    ]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda job: task(*job), jobs))
    return [task(*job) for job in jobs]


def _merge(tallies: list[BlockTally]) -> BlockTally:
    return reduce(BlockTally.merge, tallies, BlockTally())


def _simulate(
    config: SimConfig,
    rng: np.random.Generator,
    n: int,
    tilt: Optional[np.ndarray] = None,
    multi_step: bool = False,
    record_paths: int = 0,
    record_stride: int = 1,
) -> BlockPaths:
    if config.scheme is Scheme.EXACT_CIR:
        if tilt is not None:
            raise UnsupportedCaseError("importance sampling needs a Gaussian scheme, not exact_cir")
        return simulate_exact_block(
            config, rng, n, multi_step=multi_step,
            record_paths=record_paths, record_stride=record_stride,
        )
    return simulate_gaussian_block(
        config, rng, n, tilt=tilt, record_paths=record_paths, record_stride=record_stride
    )


def _weights(paths: BlockPaths) -> np.ndarray:
    if paths.log_weight is None:
        return paths.ruined.astype(float)
    return np.where(paths.ruined, np.exp(paths.log_weight), 0.0)


def is_tilt(config: SimConfig) -> np.ndarray:
    """Drift tilt c_i = K^(1-gamma) w*(t_i) at the left end of every step."""
    t = config.dt * np.arange(config.n_steps)
    return config.scale.level * optimal_control_values(config.params, t)


def simulate_path(config: SimConfig, rng: np.random.Generator) -> PathOutcome:
    """Simulate a single path with the configured scheme.

    Args:
        config: Simulation configuration
        rng: Generator supplying the increments

    Returns:
        PathOutcome with the ruin flag, ruin time and X_T
    """
    paths = _simulate(config, rng, 1, multi_step=True)
    ruined = bool(paths.ruined[0])
    return PathOutcome(
        ruined=ruined,
        tau0=float(paths.tau0[0]) if ruined else None,
        terminal_value=float(paths.terminal[0]),
    )


def _estimate(config: SimConfig, tilt: Optional[np.ndarray], workers: int) -> RuinEstimate:
    started = time.perf_counter()

    def task(block_index: int, n: int) -> BlockTally:
        paths = _simulate(config, block_generator(config.seed, block_index), n, tilt=tilt)
        weights = _weights(paths)
        return BlockTally(
            count=n,
            hits=int(paths.ruined.sum()),
            weight_sum=float(weights.sum()),
            weight_sq_sum=float(np.square(weights).sum()),
        )

    tally = _merge(_map_blocks(config, task, workers))
    n = tally.count
    if n == 0:
        p_hat, stderr = 0.0, 0.0
    elif tilt is None:
        p_hat = tally.hits / n
        stderr = math.sqrt(p_hat * (1.0 - p_hat) / n)
    else:
        p_hat = tally.weight_sum / n
        second = tally.weight_sq_sum / n
        stderr = math.sqrt(max(second - p_hat * p_hat, 0.0) / n)

    elapsed = time.perf_counter() - started
    logger.info(
        "%s: %d/%d ruined paths, p_hat=%.6g stderr=%.3g (%.2fs)",
        config.scheme.value, tally.hits, n, p_hat, stderr, elapsed,
    )
    return RuinEstimate(
        p_hat=p_hat, stderr=stderr, n_paths=n, scheme=config.scheme, seed=config.seed, elapsed=elapsed,
    )


def estimate_ruin(config: SimConfig, workers: int = 1) -> RuinEstimate:
    """Estimate P(tau_0 <= T) by direct simulation.

    Delegates to estimate_ruin_is when config.importance_sampling is set.
    The exact CIR scheme samples X_T in one transition over [0, T].

    Args:
        config: Simulation configuration
        workers: Threads; the result does not depend on it

    Returns:
        RuinEstimate with p_hat = hits / n and Bernoulli standard error
    """
    if config.importance_sampling:
        return estimate_ruin_is(config, workers=workers)
    return _estimate(config, None, workers)


def estimate_ruin_is(
    config: SimConfig,
    tilt: Optional[np.ndarray] = None,
    workers: int = 1,
) -> RuinEstimate:
    """Importance-sampled ruin probability.

    The drift of B is tilted by c_i (default K^(1-gamma) w*(t_i)); ruined
    paths carry the likelihood ratio accumulated up to their ruin time.

    Args:
        config: Simulation configuration with a Gaussian scheme
        tilt: Optional tilt per step, length n_steps
        workers: Threads; the result does not depend on it

    Returns:
        RuinEstimate with p_hat = mean weight and its sample standard error
    """
    if config.scheme is Scheme.EXACT_CIR:
        raise UnsupportedCaseError("importance sampling needs a Gaussian scheme, not exact_cir")
    if tilt is None:
        tilt = is_tilt(config)
    tilt = np.asarray(tilt, dtype=float)
    if tilt.shape != (config.n_steps,):
        raise DomainError(f"tilt must have {config.n_steps} entries, got {tilt.shape}")
    return _estimate(config, tilt, workers)


def inclusion_tally(config: SimConfig, workers: int = 1) -> BlockTally:
    """Coupled counts of {M_T <= -K^(1-gamma)} events and non-ruined paths inside them."""
    if config.scheme is Scheme.EXACT_CIR:
        raise UnsupportedCaseError("the inclusion check needs Gaussian increments, not exact_cir")
    threshold = -config.scale.level

    def task(block_index: int, n: int) -> BlockTally:
        paths = simulate_gaussian_block(
            config, block_generator(config.seed, block_index), n, track_martingale=True
        )
        in_event = paths.martingale <= threshold
        tie = paths.martingale == threshold
        return BlockTally(
            count=n,
            hits=int(paths.ruined.sum()),
            violations=int(np.sum(in_event & ~tie & ~paths.ruined)),
            ties=int(tie.sum()),
            martingale_events=int(in_event.sum()),
        )

    return _merge(_map_blocks(config, task, workers))


def coupled_inclusion_check(config: SimConfig, workers: int = 1) -> int:
    """Number of paths with M_T < -K^(1-gamma) that were not ruined by T.

    Both sides are driven by the same increments. Ties at the threshold are
    not counted.
    """
    tally = inclusion_tally(config, workers)
    if tally.ties:
        logger.warning("%d paths hit M_T == -K^(1-gamma) exactly", tally.ties)
    logger.info(
        "%s: %d martingale events, %d ruined, %d violations",
        config.scheme.value, tally.martingale_events, tally.hits, tally.violations,
    )
    return tally.violations


def export_paths(config: SimConfig, cap: int) -> pd.DataFrame:
    """X on every step for the first cap paths of block 0.

    Args:
        config: Simulation configuration
        cap: Maximum number of paths to keep

    Returns:
        Long DataFrame with columns path_id, t, x
    """
    if cap < 1:
        raise DomainError(f"cap must be positive, got {cap}")
    n = min(config.n_paths, config.block_size)
    tilt = is_tilt(config) if config.importance_sampling else None
    paths = _simulate(
        config, block_generator(config.seed, 0), n,
        tilt=tilt, multi_step=True, record_paths=min(cap, n),
    )
    n_times, n_kept = paths.record.shape
    return pd.DataFrame({
        "path_id": np.repeat(np.arange(n_kept), n_times),
        "t": np.tile(paths.record_times, n_kept),
        "x": paths.record.T.ravel(),
    })


def ruin_path_profile(
    config: SimConfig,
    points: int = DEFAULT_PROFILE_POINTS,
    workers: int = 1,
) -> pd.DataFrame:
    """Weighted mean of normalized ruined paths next to u*.

    Ruined paths are averaged with their importance weights (1 without
    tilting) on a strided grid of about points times.

    Args:
        config: Simulation configuration
        points: Approximate number of output times
        workers: Threads; the result does not depend on it

    Returns:
        DataFrame with columns t, profile, u_star
    """
    stride = max(1, config.n_steps // max(1, points))
    tilt = is_tilt(config) if config.importance_sampling else None

    def task(block_index: int, n: int) -> tuple[np.ndarray, np.ndarray, float]:
        paths = _simulate(
            config, block_generator(config.seed, block_index), n,
            tilt=tilt, multi_step=True, record_paths=n, record_stride=stride,
        )
        weights = _weights(paths)
        scaled = normalize(paths.record, config.scale)
        return paths.record_times, scaled @ weights, float(weights.sum())

    results = _map_blocks(config, task, workers)
    if not results:
        raise DomainError("no paths to profile")
    times = results[0][0]
    total = sum(weight for _, _, weight in results)
    if total <= 0:
        raise DomainError("no ruined paths; increase n_paths or enable importance sampling")

    profile = sum(weighted for _, weighted, _ in results) / total
    logger.info("ruin profile from %.6g total weight on %d times", total, times.size)
    return pd.DataFrame({
        "t": times,
        "profile": profile,
        "u_star": most_likely_path_values(config.params, times),
    })
