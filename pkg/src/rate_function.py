"""Absorbed paths, the rate function J_T and the most likely path to ruin."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from errors import DomainError
from model_core import ModelParams, decay_ratio, lamperti_inverse


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def _check_grid(grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("a grid needs at least two time points")
    if grid[0] != 0:
        raise DomainError(f"grid must start at t=0, got {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")


@dataclass(frozen=True, eq=False)
class AbsorbedPath:
    """Nonnegative path on a time grid, frozen at zero after its first zero."""

    grid: np.ndarray
    values: np.ndarray
    absorption_index: Optional[int] = field(init=False, default=None)

    def __post_init__(self):
        grid = _frozen(self.grid)
        values = _frozen(self.values)
        _check_grid(grid)
        if values.shape != grid.shape:
            raise DomainError("grid and values must have the same length")
        if np.any(values < 0):
            raise DomainError("path values must be nonnegative")

        zeros = np.flatnonzero(values == 0)
        index = int(zeros[0]) if zeros.size else None
        if index is not None and np.any(values[index:] != 0):
            raise DomainError(f"path leaves zero after absorption at index {index}")

        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "absorption_index", index)

    @classmethod
    def absorbed(cls, grid: np.ndarray, values: np.ndarray) -> "AbsorbedPath":
        """Build a path, freezing it at zero from the first nonpositive value on."""
        values = np.array(values, dtype=float)
        hits = np.flatnonzero(values <= 0)
        if hits.size:
            values[hits[0]:] = 0.0
        return cls(grid=grid, values=values)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def __len__(self) -> int:
        return self.grid.size


@dataclass(frozen=True, eq=False)
class ControlFunction:
    """Control levels w on a time grid covering [0, theta]."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _frozen(self.grid)
        values = _frozen(self.values)
        _check_grid(grid)
        if values.shape != grid.shape:
            raise DomainError("grid and values must have the same length")
        if not math.isfinite(trapezoid(values ** 2, grid)):
            raise DomainError("control must have a finite squared integral")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def theta(self) -> float:
        return float(self.grid[-1])


def absorption_time(path: AbsorbedPath) -> Optional[float]:
    """Grid time of the first zero value, or None when the path never hits zero."""
    if path.absorption_index is None:
        return None
    return float(path.grid[path.absorption_index])


def floored(path: AbsorbedPath, level: float) -> AbsorbedPath:
    """Regularized path max(u, level), which never reaches zero."""
    if level <= 0:
        raise DomainError(f"floor level must be positive, got {level}")
    return AbsorbedPath(grid=path.grid, values=np.maximum(path.values, level))


def rate_J(path: AbsorbedPath, params: ModelParams, floor: Optional[float] = None) -> float:
    """Rate function J_T(u) = 1/(2 sigma^2) int ((u' - mu u) / u^gamma)^2 dt.

    Per interval the slope is the forward difference and u is the mean of the
    two endpoint values. Intervals that are flat at zero contribute nothing,
    so the integral effectively stops at the absorption time.

    Args:
        path: Path starting at 1
        params: Model parameters
        floor: Optional regularization level; the rate of max(u, floor) is returned

    Returns:
        Rate value, math.inf for paths outside the normalized family
    """
    if path.values[0] != 1.0:
        return math.inf

    values = path.values if floor is None else np.maximum(path.values, floor)
    dt = np.diff(path.grid)
    slope = np.diff(values) / dt
    mid = 0.5 * (values[:-1] + values[1:])

    flat_zero = (mid == 0) & (slope == 0)
    if np.any((mid == 0) & ~flat_zero):
        return math.inf

    active = ~flat_zero
    residual = slope[active] - params.mu * mid[active]
    integrand = (residual / np.power(mid[active], params.gamma)) ** 2
    total = float(np.sum(integrand * dt[active]))
    if not math.isfinite(total):
        return math.inf
    return total / (2.0 * params.sigma ** 2)


def richardson_rate(
    values_fn: Callable[[np.ndarray], np.ndarray],
    params: ModelParams,
    n_intervals: int,
) -> float:
    """First-order Richardson extrapolation 2 J(h/2) - J(h) of rate_J.

    Args:
        values_fn: Path as a function of a time array
        params: Model parameters
        n_intervals: Intervals of the coarse grid on [0, T]

    Returns:
        Extrapolated rate
    """
    coarse_grid = np.linspace(0.0, params.horizon_T, n_intervals + 1)
    fine_grid = np.linspace(0.0, params.horizon_T, 2 * n_intervals + 1)
    coarse = rate_J(AbsorbedPath(coarse_grid, values_fn(coarse_grid)), params)
    fine = rate_J(AbsorbedPath(fine_grid, values_fn(fine_grid)), params)
    return 2.0 * fine - coarse


def most_likely_path_values(params: ModelParams, t: np.ndarray) -> np.ndarray:
    """Vectorized u*_t on [0, T]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > params.horizon_T):
        raise DomainError(f"times outside [0, {params.horizon_T}]")
    T = params.horizon_T
    a = params.decay_rate
    remaining = T - t
    # v* = e^{-at} (T-t)/T * ratio, written to stay exact at both ends
    v_star = (
        np.exp(-a * t)
        * (remaining / T)
        * decay_ratio(2.0 * a * remaining)
        / decay_ratio(2.0 * a * T)
    )
    return lamperti_inverse(np.maximum(v_star, 0.0), params.gamma)


def most_likely_path(params: ModelParams, t: float) -> float:
    """Most likely path to ruin u*_t of the normalized process.

    Obtained from v' = mu(1-gamma) v + sigma(1-gamma) w*, v_0 = 1, and
    u* = v^{1/(1-gamma)}; u*_0 = 1 and u*_T = 0.
    """
    return float(most_likely_path_values(params, np.asarray(t, dtype=float)))


def most_likely_path_grid(params: ModelParams, n_points: int) -> AbsorbedPath:
    """u* sampled on a uniform grid of n_points over [0, T]."""
    grid = np.linspace(0.0, params.horizon_T, n_points)
    return AbsorbedPath(grid=grid, values=most_likely_path_values(params, grid))


def optimal_control_values(params: ModelParams, t: np.ndarray) -> np.ndarray:
    """Vectorized w*_t on [0, T]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > params.horizon_T):
        raise DomainError(f"times outside [0, {params.horizon_T}]")
    T = params.horizon_T
    a = params.decay_rate
    one_minus_gamma = 1.0 - params.gamma
    # 2 mu / (1 - e^{-2aT}) == 1 / ((1-gamma) T ratio(2aT))
    level = 1.0 / (params.sigma * one_minus_gamma * T * decay_ratio(2.0 * a * T))
    return -level * np.exp(-a * t)


def optimal_control(params: ModelParams, t: float) -> float:
    """Optimal control w*_t = -(1/sigma) 2mu/(1 - e^{-2mu(1-gamma)T}) e^{-mu(1-gamma)t}."""
    return float(optimal_control_values(params, np.asarray(t, dtype=float)))


def optimal_control_grid(params: ModelParams, n_points: int) -> ControlFunction:
    """w* sampled on a uniform grid of n_points over [0, T]."""
    grid = np.linspace(0.0, params.horizon_T, n_points)
    return ControlFunction(grid=grid, values=optimal_control_values(params, grid))


def lamperti_state(params: ModelParams, control: ControlFunction) -> np.ndarray:
    """Trapezoidal stepping of v' = mu(1-gamma) v + sigma(1-gamma) w from v_0 = 1.

    The state is not stopped at zero; callers decide how to absorb it.
    """
    a = params.decay_rate
    b = params.sigma * (1.0 - params.gamma)
    dt = np.diff(control.grid)
    w = control.values

    v = np.empty_like(control.grid)
    v[0] = 1.0
    for i, h in enumerate(dt):
        forcing = 0.5 * h * b * (w[i] + w[i + 1])
        v[i + 1] = (v[i] * (1.0 + 0.5 * a * h) + forcing) / (1.0 - 0.5 * a * h)
    return v


def controlled_path(params: ModelParams, control: ControlFunction) -> AbsorbedPath:
    """Path of u' = mu u + sigma u^gamma w, u_0 = 1, absorbed at its first zero.

    Solved through the Lamperti-linear state v = u^{1-gamma}.
    """
    v = lamperti_state(params, control)
    hits = np.flatnonzero(v <= 0)
    if hits.size:
        v[hits[0]:] = 0.0
    return AbsorbedPath(grid=control.grid, values=lamperti_inverse(v, params.gamma))
