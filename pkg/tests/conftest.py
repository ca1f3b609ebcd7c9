"""Shared fixtures."""

import numpy as np
import pytest

from model_core import ModelParams, ScaleParams
from montecarlo import Scheme, SimConfig


def make_params(mu=0.0, sigma=1.0, gamma=0.5, T=1.0) -> ModelParams:
    return ModelParams(mu=mu, sigma=sigma, gamma=gamma, horizon_T=T)


def make_config(
    mu=0.0,
    sigma=1.0,
    gamma=0.5,
    T=1.0,
    K=1.0,
    scheme=Scheme.LAMPERTI,
    n_paths=10_000,
    n_steps=500,
    seed=12345,
    importance_sampling=False,
    block_size=4096,
) -> SimConfig:
    params = make_params(mu, sigma, gamma, T)
    return SimConfig(
        params=params,
        scale=ScaleParams.for_params(params, K),
        scheme=scheme,
        n_steps=n_steps,
        n_paths=n_paths,
        seed=seed,
        importance_sampling=importance_sampling,
        block_size=block_size,
    )


def random_admissible_values(rng: np.random.Generator, grid: np.ndarray, gamma: float) -> np.ndarray:
    """Random path from 1 to 0, absorbed at a random time in (0.3T, T]."""
    T = grid[-1]
    tau = rng.uniform(0.3 * T, T)
    s = np.clip(grid / tau, 0.0, 1.0)
    amplitudes = rng.uniform(-1.0, 1.0, size=4)
    amplitudes *= 0.8 / np.sum(np.abs(amplitudes))
    k = np.arange(1, 5)
    bump = 1.0 + np.sin(np.pi * np.outer(s, k)) @ amplitudes
    v = (1.0 - s) * bump
    return np.power(np.maximum(v, 0.0), 1.0 / (1.0 - gamma))


@pytest.fixture
def cir_params() -> ModelParams:
    return make_params()


@pytest.fixture
def cev_params() -> ModelParams:
    return make_params(mu=0.1, gamma=0.75)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
