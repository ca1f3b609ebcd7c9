"""Model parameters and closed-form ruin asymptotics of the CEV diffusion.

The diffusion is dX = mu X dt + sigma X^gamma dB with X_0 = K and absorption
at zero. Everything here is a pure function of validated parameters.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator
from scipy.special import log_ndtr, ndtr

from errors import DomainError, UnsupportedCaseError

# mu -> 0 limit branch is used when |mu (1 - gamma) t| falls below this value
LIMIT_BRANCH_THRESHOLD = 1e-6


class ModelParams(BaseModel):
    """Drift, volatility, elasticity and horizon of the CEV model."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., allow_inf_nan=False, description="Drift rate (1/time)")
    sigma: float = Field(..., allow_inf_nan=False, description="Volatility scale, nonzero")
    gamma: float = Field(..., ge=0.5, lt=1.0, description="Elasticity exponent in [1/2, 1)")
    horizon_T: float = Field(..., gt=0, allow_inf_nan=False, description="Time horizon T")

    @field_validator("sigma")
    @classmethod
    def _sigma_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("sigma must be nonzero")
        return value

    @property
    def T(self) -> float:
        return self.horizon_T

    @property
    def decay_rate(self) -> float:
        """mu (1 - gamma), the rate of the Lamperti-linear dynamics."""
        return self.mu * (1.0 - self.gamma)


class ScaleParams(BaseModel):
    """Initial condition K and the K-scaling exponents derived from gamma."""

    model_config = ConfigDict(frozen=True)

    initial_K: float = Field(..., gt=0, allow_inf_nan=False, description="X_0 = K")
    gamma: float = Field(..., ge=0.5, lt=1.0, description="Elasticity the exponents derive from")

    @classmethod
    def for_params(cls, params: ModelParams, initial_K: float) -> "ScaleParams":
        """Build the scale for a given K, taking gamma from the model."""
        return cls(initial_K=initial_K, gamma=params.gamma)

    @computed_field
    @property
    def speed_exponent(self) -> float:
        """2 (1 - gamma): the LDP speed is K^speed_exponent."""
        return 2.0 * (1.0 - self.gamma)

    @computed_field
    @property
    def norm_exponent(self) -> float:
        """1 - gamma: the noise of x^K scales as K^-norm_exponent."""
        return 1.0 - self.gamma

    @property
    def speed(self) -> float:
        return self.initial_K ** self.speed_exponent

    @property
    def level(self) -> float:
        """K^(1 - gamma), the Lamperti image of the initial condition."""
        return self.initial_K ** self.norm_exponent


def _check_scale(params: ModelParams, scale: ScaleParams) -> None:
    if scale.gamma != params.gamma:
        raise DomainError(
            f"scale built for gamma={scale.gamma} used with gamma={params.gamma}"
        )


def _check_gamma(gamma: float) -> None:
    if not 0.5 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0.5, 1), got {gamma}")


def _check_time(params: ModelParams, t: float) -> None:
    if t < 0 or t > params.horizon_T:
        raise DomainError(f"time {t} outside [0, {params.horizon_T}]")


def decay_ratio(x: float | np.ndarray) -> float | np.ndarray:
    """(1 - e^{-x}) / x with its limit 1 at x = 0.

    The series 1 - x/2 + x^2/6 is used when |x|/2 is below the limit-branch
    threshold, so both branches agree to far more than 10 digits at the seam.
    """
    x_arr = np.asarray(x, dtype=float)
    small = np.abs(x_arr) < 2.0 * LIMIT_BRANCH_THRESHOLD
    safe = np.where(small, 1.0, x_arr)
    result = np.where(small, 1.0 - x_arr / 2.0 + x_arr * x_arr / 6.0, -np.expm1(-safe) / safe)
    if np.ndim(result) == 0:
        return float(result)
    return result


def uses_limit_branch(params: ModelParams) -> bool:
    """Whether closed forms evaluate on the mu -> 0 branch."""
    return abs(params.decay_rate * params.horizon_T) < LIMIT_BRANCH_THRESHOLD


def bracket_variance(params: ModelParams, t: float) -> float:
    """Variance <M>_t of the Gaussian martingale M_t.

    <M>_t = int_0^t sigma^2 (1-gamma)^2 e^{-2(1-gamma) mu s} ds.

    Args:
        params: Model parameters
        t: Time in [0, T]

    Returns:
        <M>_t (0 at t = 0)
    """
    _check_time(params, t)
    if t == 0:
        return 0.0
    one_minus_gamma = 1.0 - params.gamma
    scale = params.sigma ** 2 * one_minus_gamma ** 2 * t
    return scale * decay_ratio(2.0 * params.decay_rate * t)


def asymptotic_exponent(params: ModelParams) -> float:
    """Limit of -log P(tau_0 <= T) / K^{2(1-gamma)}, that is 1 / (2 <M>_T)."""
    variance = bracket_variance(params, params.horizon_T)
    if variance == 0:
        return math.inf
    return 1.0 / (2.0 * variance)


def theta_bound(params: ModelParams, theta: float) -> float:
    """Lower bound on (1/2) int w^2 for controls absorbing at time theta.

    mu / (sigma^2 (1-gamma) (1 - e^{-2 mu (1-gamma) theta})), with the
    mu -> 0 limit 1 / (2 sigma^2 (1-gamma)^2 theta). Decreasing in theta and
    equal to asymptotic_exponent at theta = T.

    Args:
        params: Model parameters
        theta: Absorption time in (0, T]

    Returns:
        Bound value
    """
    if theta <= 0 or theta > params.horizon_T:
        raise DomainError(f"theta {theta} outside (0, {params.horizon_T}]")
    one_minus_gamma = 1.0 - params.gamma
    x = 2.0 * params.decay_rate * theta
    if abs(x) < 2.0 * LIMIT_BRANCH_THRESHOLD:
        return 1.0 / (2.0 * params.sigma ** 2 * one_minus_gamma ** 2 * theta * decay_ratio(x))
    return params.mu / (params.sigma ** 2 * one_minus_gamma * (1.0 - math.exp(-x)))


def martingale_rate(params: ModelParams, v: float) -> float:
    """Rate function I(v) = v^2 / (2 <M>_T) of K^{-(1-gamma)} M_T.

    Its infimum over v <= -1 is attained at v = -1 and equals the
    asymptotic exponent.
    """
    return v * v * asymptotic_exponent(params)


def gaussian_lower_bound(params: ModelParams, scale: ScaleParams) -> float:
    """Lower bound P(tau_0 <= T) >= P(M_T <= -K^{1-gamma}), valid for any K.

    Args:
        params: Model parameters
        scale: Initial condition

    Returns:
        Phi(-K^{1-gamma} / sqrt(<M>_T))
    """
    _check_scale(params, scale)
    variance = bracket_variance(params, params.horizon_T)
    if variance == 0:
        return 0.0
    return float(ndtr(-scale.level / math.sqrt(variance)))


def log_gaussian_lower_bound(params: ModelParams, scale: ScaleParams) -> float:
    """Natural log of gaussian_lower_bound, accurate far in the tail."""
    _check_scale(params, scale)
    variance = bracket_variance(params, params.horizon_T)
    if variance == 0:
        return -math.inf
    return float(log_ndtr(-scale.level / math.sqrt(variance)))


def exact_ruin_cir(params: ModelParams, scale: ScaleParams) -> float:
    """Exact P(tau_0 <= T) for the square-root (gamma = 1/2) diffusion.

    exp(-K 2 mu / (sigma^2 (1 - e^{-mu T}))), with the mu -> 0 branch
    exp(-2K / (sigma^2 T)). Its log divided by K is minus the asymptotic
    exponent.

    Args:
        params: Model parameters with gamma = 1/2
        scale: Initial condition

    Returns:
        Ruin probability
    """
    if params.gamma != 0.5:
        raise UnsupportedCaseError(
            f"exact ruin probability is only available for gamma=0.5, got {params.gamma}"
        )
    _check_scale(params, scale)
    return math.exp(-scale.initial_K * asymptotic_exponent(params))


def lamperti_forward(x: float | np.ndarray, gamma: float) -> float | np.ndarray:
    """Power map x -> x^{1-gamma}."""
    _check_gamma(gamma)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("lamperti_forward requires nonnegative input")
    result = np.power(x_arr, 1.0 - gamma)
    return float(result) if np.ndim(result) == 0 else result


def lamperti_inverse(v: float | np.ndarray, gamma: float) -> float | np.ndarray:
    """Inverse power map v -> v^{1/(1-gamma)}."""
    _check_gamma(gamma)
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0):
        raise DomainError("lamperti_inverse requires nonnegative input")
    result = np.power(v_arr, 1.0 / (1.0 - gamma))
    return float(result) if np.ndim(result) == 0 else result


def normalized_noise(params: ModelParams, scale: ScaleParams) -> float:
    """Small diffusion parameter sigma / K^{1-gamma} of x^K = X / K."""
    _check_scale(params, scale)
    return params.sigma / scale.level


def normalize(values: np.ndarray, scale: ScaleParams) -> np.ndarray:
    """Normalized path x^K = X / K; ruin times are unchanged."""
    return np.asarray(values, dtype=float) / scale.initial_K


def normalized_log(p: float, scale: ScaleParams) -> Optional[float]:
    """log(p) / K^{2(1-gamma)}, or None when p = 0."""
    if p <= 0:
        return None
    return math.log(p) / scale.speed
