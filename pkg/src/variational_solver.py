"""Discrete solution of the minimum-energy ruin control problem.

Minimize (1/2) int_0^theta w^2 dt over controls that steer the
Lamperti-linear state v' = mu(1-gamma) v + sigma(1-gamma) w from 1 to 0 at
time theta. With trapezoidal weights q_i the problem has one linear
constraint, so its least-norm solution is explicit (Lagrange form).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from errors import DomainError
from model_core import ModelParams, theta_bound
from rate_function import ControlFunction, lamperti_state

logger = logging.getLogger(__name__)

DEFAULT_THETA_POINTS = 100


@dataclass(frozen=True)
class DiscreteControlProblem:
    """Control problem on a uniform grid of n_steps intervals over [0, theta]."""

    params: ModelParams
    n_steps: int
    theta: float

    def __post_init__(self):
        if self.n_steps < 2:
            raise DomainError(f"n_steps must be at least 2, got {self.n_steps}")
        if not 0 < self.theta <= self.params.horizon_T:
            raise DomainError(
                f"theta {self.theta} outside (0, {self.params.horizon_T}]"
            )

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.theta, self.n_steps + 1)


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    dt = np.diff(grid)
    if np.any(dt <= 0):
        raise DomainError("degenerate grid: time steps must be positive")
    weights = np.zeros_like(grid)
    weights[:-1] += 0.5 * dt
    weights[1:] += 0.5 * dt
    return weights


def constraint_residual(problem: DiscreteControlProblem, control: ControlFunction) -> float:
    """Residual of sum q_i e^{-mu(1-gamma)t_i} w_i + 1/(sigma(1-gamma))."""
    params = problem.params
    discount = np.exp(-params.decay_rate * control.grid)
    target = -1.0 / (params.sigma * (1.0 - params.gamma))
    return float(np.sum(_trapezoid_weights(control.grid) * discount * control.values) - target)


def solve_least_norm(problem: DiscreteControlProblem) -> ControlFunction:
    """Least-norm control meeting the absorption constraint at theta.

    w_i = lambda e^{-mu(1-gamma)t_i} with
    lambda = -(1/(sigma(1-gamma))) / sum q_i e^{-2mu(1-gamma)t_i}.

    Args:
        problem: Discretized control problem

    Returns:
        Solved control on the problem grid
    """
    params = problem.params
    grid = problem.grid
    weights = _trapezoid_weights(grid)
    discount = np.exp(-params.decay_rate * grid)

    target = -1.0 / (params.sigma * (1.0 - params.gamma))
    multiplier = target / np.sum(weights * discount * discount)
    return ControlFunction(grid=grid, values=multiplier * discount)


def action(control: ControlFunction) -> float:
    """(1/2) int w^2 dt by the trapezoidal rule."""
    return 0.5 * float(trapezoid(control.values ** 2, control.grid))


def integrate_control(problem: DiscreteControlProblem, control: ControlFunction) -> np.ndarray:
    """Lamperti-linear state driven by a control; v(theta) is about 0 for solved controls."""
    return lamperti_state(problem.params, control)


def _action_at(params: ModelParams, n_steps: int, theta: float) -> tuple[float, float, float]:
    problem = DiscreteControlProblem(params=params, n_steps=n_steps, theta=theta)
    return theta, action(solve_least_norm(problem)), theta_bound(params, theta)


def theta_scan(
    params: ModelParams,
    n_steps: int,
    n_theta: int = DEFAULT_THETA_POINTS,
    workers: int = 1,
) -> pd.DataFrame:
    """Action of the least-norm control for each absorption time on a theta grid.

    The grid is T/n_theta, 2T/n_theta, ..., T, so theta = T is always present.

    Args:
        params: Model parameters
        n_steps: Steps of each discretized problem
        n_theta: Number of theta values
        workers: Threads used for the scan

    Returns:
        DataFrame with columns theta, action, bound
    """
    if n_theta < 1:
        raise DomainError(f"n_theta must be positive, got {n_theta}")
    thetas = params.horizon_T * np.arange(1, n_theta + 1) / n_theta
    thetas[-1] = params.horizon_T

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(lambda th: _action_at(params, n_steps, th), thetas))
    else:
        rows = [_action_at(params, n_steps, th) for th in thetas]

    return pd.DataFrame(rows, columns=["theta", "action", "bound"])


def best_theta(
    params: ModelParams,
    n_steps: int,
    n_theta: int = DEFAULT_THETA_POINTS,
    workers: int = 1,
) -> tuple[float, float]:
    """Absorption time with the cheapest least-norm control.

    Args:
        params: Model parameters
        n_steps: Steps of each discretized problem
        n_theta: Number of theta values scanned
        workers: Threads used for the scan

    Returns:
        (theta, action_value); ties resolve to the earliest theta
    """
    if n_steps < 2:
        raise DomainError(f"n_steps must be at least 2, got {n_steps}")
    scan = theta_scan(params, n_steps, n_theta, workers)
    best = scan.loc[scan["action"].idxmin()]
    logger.debug("theta scan minimum at theta=%.6g action=%.12g", best["theta"], best["action"])
    return float(best["theta"]), float(best["action"])
