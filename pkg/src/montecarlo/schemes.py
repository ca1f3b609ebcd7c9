"""Vectorized CEV path kernels: full-truncation Euler, Lamperti and exact CIR.

Each kernel advances a whole block of paths together. Ruined paths are set to
zero and stay there; the Gaussian kernels still draw their increments so the
shared martingale M_T is defined on the full horizon.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import UnsupportedCaseError
from model_core import decay_ratio, lamperti_inverse
from montecarlo.models import Scheme, SimConfig


@dataclass
class BlockPaths:
    """Per-path outcomes of one simulated block."""

    ruined: np.ndarray
    tau0: np.ndarray
    terminal: np.ndarray
    log_weight: Optional[np.ndarray] = None
    martingale: Optional[np.ndarray] = None
    record_times: Optional[np.ndarray] = None
    record: Optional[np.ndarray] = None


class _Recorder:
    """Keeps X on a strided subset of the step grid for the first few paths."""

    def __init__(self, times: np.ndarray, n_paths: int, stride: int):
        n_steps = times.size - 1
        self.index = np.unique(np.r_[np.arange(0, n_steps + 1, max(1, stride)), n_steps])
        self.times = times[self.index]
        self.values = np.zeros((self.index.size, n_paths))
        self.n_paths = n_paths
        self._slot = {int(step): row for row, step in enumerate(self.index)}

    def __call__(self, step: int, x: np.ndarray) -> None:
        row = self._slot.get(step)
        if row is not None:
            self.values[row] = x[: self.n_paths]


def _step_times(T: float, n_steps: int) -> np.ndarray:
    times = T * np.arange(n_steps + 1) / n_steps
    times[-1] = T
    return times


def simulate_gaussian_block(
    config: SimConfig,
    rng: np.random.Generator,
    n: int,
    tilt: Optional[np.ndarray] = None,
    track_martingale: bool = False,
    record_paths: int = 0,
    record_stride: int = 1,
) -> BlockPaths:
    """Simulate n paths with the Euler or Lamperti scheme.

    Args:
        config: Simulation configuration (Euler or Lamperti scheme)
        rng: Block generator
        n: Number of paths in the block
        tilt: Optional drift tilt c_i per step; the Girsanov log-weight
            -sum c_i sqrt(dt) Z_i - 1/2 sum c_i^2 dt is accumulated up to ruin
        track_martingale: Accumulate M_T = sum sigma(1-gamma) e^{-(1-gamma)mu t_i} sqrt(dt) Z_i
        record_paths: Number of leading paths whose X is recorded
        record_stride: Record every record_stride-th step

    Returns:
        BlockPaths for the block
    """
    if config.scheme is Scheme.EXACT_CIR:
        raise UnsupportedCaseError("exact_cir has no Gaussian increments")

    params = config.params
    mu, sigma, gamma = params.mu, params.sigma, params.gamma
    n_steps = config.n_steps
    dt = config.dt
    sqrt_dt = math.sqrt(dt)
    times = _step_times(params.horizon_T, n_steps)
    lamperti = config.scheme is Scheme.LAMPERTI

    if lamperti:
        state = np.full(n, config.scale.level)
        growth = math.exp(params.decay_rate * dt)
        diffusion = sigma * (1.0 - gamma)
        pull = 0.5 * gamma * (1.0 - gamma) * sigma ** 2 * dt
    else:
        state = np.full(n, config.scale.initial_K)

    alive = np.ones(n, dtype=bool)
    tau0 = np.full(n, np.nan)
    log_weight = np.zeros(n) if tilt is not None else None
    martingale = np.zeros(n) if track_martingale else None
    if track_martingale:
        martingale_coef = sigma * (1.0 - gamma) * np.exp(-params.decay_rate * times[:-1]) * sqrt_dt

    recorder = None
    if record_paths > 0:
        recorder = _Recorder(times, min(record_paths, n), record_stride)
        recorder(0, np.full(n, config.scale.initial_K))

    for i in range(n_steps):
        if martingale is None and not alive.any():
            break

        z = rng.standard_normal(n)
        if martingale is not None:
            martingale += martingale_coef[i] * z

        dB = sqrt_dt * z
        if tilt is not None:
            c = float(tilt[i])
            dB = dB + c * dt
            log_weight -= np.where(alive, c * sqrt_dt * z + 0.5 * c * c * dt, 0.0)

        if lamperti:
            safe = np.where(alive, state, 1.0)
            # linear part of the transformed dynamics integrated exactly over the step
            proposal = growth * (safe - pull / safe + diffusion * dB)
        else:
            proposal = state + mu * state * dt + sigma * np.maximum(state, 0.0) ** gamma * dB

        hit = alive & (proposal <= 0)
        tau0[hit] = times[i + 1]
        state = np.where(alive & ~hit, proposal, 0.0)
        alive &= ~hit

        if recorder is not None:
            recorder(i + 1, lamperti_inverse(state, gamma) if lamperti else state)

    terminal = lamperti_inverse(state, gamma) if lamperti else state
    return BlockPaths(
        ruined=~alive,
        tau0=tau0,
        terminal=terminal,
        log_weight=log_weight,
        martingale=martingale,
        record_times=recorder.times if recorder is not None else None,
        record=recorder.values if recorder is not None else None,
    )


def simulate_exact_block(
    config: SimConfig,
    rng: np.random.Generator,
    n: int,
    multi_step: bool = False,
    record_paths: int = 0,
    record_stride: int = 1,
) -> BlockPaths:
    """Exact square-root diffusion transitions (gamma = 1/2).

    Over a step h the transition is a Poisson mixture of gammas,
    X' = (sigma^2 h e^{mu h} r(mu h) / 2) Gamma(N), N ~ Poisson(2X / (sigma^2 h r(mu h)))
    with r(x) = (1 - e^{-x})/x; Gamma(0) is the atom at zero.

    Args:
        config: Simulation configuration with gamma = 1/2
        rng: Block generator
        n: Number of paths in the block
        multi_step: Use config.n_steps transitions instead of one over [0, T]
        record_paths: Number of leading paths whose X is recorded (multi-step only)
        record_stride: Record every record_stride-th step

    Returns:
        BlockPaths; tau0 is NaN for ruined paths in one-step mode
    """
    params = config.params
    if params.gamma != 0.5:
        raise UnsupportedCaseError(f"exact_cir requires gamma=0.5, got {params.gamma}")

    n_steps = config.n_steps if multi_step else 1
    h = params.horizon_T / n_steps
    ratio = decay_ratio(params.mu * h)
    poisson_scale = 2.0 / (params.sigma ** 2 * h * ratio)
    gamma_scale = 0.5 * params.sigma ** 2 * h * math.exp(params.mu * h) * ratio
    times = _step_times(params.horizon_T, n_steps)

    state = np.full(n, config.scale.initial_K)
    alive = np.ones(n, dtype=bool)
    tau0 = np.full(n, np.nan)

    recorder = None
    if record_paths > 0 and multi_step:
        recorder = _Recorder(times, min(record_paths, n), record_stride)
        recorder(0, state)

    for i in range(n_steps):
        if not alive.any():
            break
        shape = rng.poisson(poisson_scale * state)
        state = gamma_scale * rng.standard_gamma(shape)
        hit = alive & (state == 0)
        if multi_step:
            tau0[hit] = times[i + 1]
        alive &= ~hit
        if recorder is not None:
            recorder(i + 1, state)

    return BlockPaths(
        ruined=~alive,
        tau0=tau0,
        terminal=state,
        record_times=recorder.times if recorder is not None else None,
        record=recorder.values if recorder is not None else None,
    )
