"""Cross-module oracle suite behind the `validate` subcommand."""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field
from scipy.integrate import solve_ivp, trapezoid

from model_core import (
    ModelParams,
    ScaleParams,
    asymptotic_exponent,
    decay_ratio,
    exact_ruin_cir,
    gaussian_lower_bound,
    martingale_rate,
    theta_bound,
)
from montecarlo import Scheme, SimConfig, coupled_inclusion_check, estimate_ruin, estimate_ruin_is
from rate_function import (
    controlled_path,
    most_likely_path_values,
    optimal_control_grid,
    optimal_control_values,
    richardson_rate,
)
from variational_solver import best_theta

logger = logging.getLogger(__name__)

SEAM_MU = 1e-8
IDENTITY_TOL = 1e-12
SEAM_TOL = 1e-10
EXPONENT_TOL = 1e-3
ODE_TOL = 1e-8
CONTROLLED_PATH_TOL = 1e-3
ORACLE_SIGMAS = 4.0
LOWER_BOUND_SIGMAS = 3.0
# discrete monitoring misses some crossings of the time-stepped scheme
SCHEME_BIAS = 0.05


class CheckResult(BaseModel):
    """Outcome of one validation item."""

    name: str
    passed: bool
    measured: float = Field(..., description="Worst observed error or count")
    tolerance: float
    detail: str = ""


class ValidationReport(BaseModel):
    """Ordered check results of one validate run."""

    seed: int
    quick: bool
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def format_table(self) -> str:
        lines = [
            f"{'#':>2}  {'check':<34} {'status':<6} {'measured':>12} {'tolerance':>12}  detail",
            "-" * 96,
        ]
        for i, c in enumerate(self.checks, 1):
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"{i:>2}  {c.name:<34} {status:<6} {c.measured:>12.4g} {c.tolerance:>12.4g}  {c.detail}"
            )
        lines.append("-" * 96)
        verdict = "all checks passed" if self.passed else f"{len(self.failures)} check(s) failed"
        lines.append(f"seed={self.seed} quick={self.quick}: {verdict}")
        return "\n".join(lines)


@dataclass(frozen=True)
class SuiteScale:
    """Grid sizes and path counts of one validate run."""

    grid_points: int
    richardson_intervals: int
    inclusion_paths: int
    inclusion_steps: int
    oracle_paths: int
    scheme_paths: int
    scheme_steps: int
    lower_bound_paths: int
    lower_bound_steps: int
    combos: tuple[tuple[float, float], ...]


FULL_SCALE = SuiteScale(
    grid_points=10_000,
    richardson_intervals=2_000,
    inclusion_paths=100_000,
    inclusion_steps=4000,
    oracle_paths=1_000_000,
    scheme_paths=100_000,
    scheme_steps=1000,
    lower_bound_paths=100_000,
    lower_bound_steps=1000,
    combos=tuple((mu, g) for mu in (-0.5, 0.0, 0.5) for g in (0.5, 0.75, 0.9)),
)

QUICK_SCALE = SuiteScale(
    grid_points=2_000,
    richardson_intervals=1_000,
    inclusion_paths=10_000,
    inclusion_steps=1000,
    oracle_paths=100_000,
    scheme_paths=10_000,
    scheme_steps=500,
    lower_bound_paths=10_000,
    lower_bound_steps=500,
    combos=((-0.5, 0.75), (0.0, 0.5), (0.5, 0.9)),
)


def _params(mu: float, gamma: float, sigma: float = 1.0, T: float = 1.0) -> ModelParams:
    return ModelParams(mu=mu, sigma=sigma, gamma=gamma, horizon_T=T)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_model_identities(scale: SuiteScale) -> list[CheckResult]:
    """Algebraic identities of the closed forms and the mu -> 0 seam."""
    identity_err = 0.0
    for mu, gamma in scale.combos:
        params = _params(mu, gamma)
        exponent = asymptotic_exponent(params)
        identity_err = max(
            identity_err,
            _rel(martingale_rate(params, -1.0), exponent),
            _rel(theta_bound(params, params.horizon_T), exponent),
        )
        if gamma == 0.5:
            p = exact_ruin_cir(params, ScaleParams.for_params(params, 2.0))
            identity_err = max(identity_err, _rel(-math.log(p) / 2.0, exponent))

    seam_err = 0.0
    for mu in (SEAM_MU, -SEAM_MU):
        for gamma in (0.5, 0.75):
            params = _params(mu, gamma)
            one_minus_gamma = 1.0 - gamma
            x = 2.0 * params.decay_rate * params.horizon_T
            general = mu / (params.sigma ** 2 * one_minus_gamma * -math.expm1(-x))
            seam_err = max(
                seam_err,
                _rel(asymptotic_exponent(params), general),
                _rel(decay_ratio(x), -math.expm1(-x) / x),
            )

    return [
        CheckResult(
            name="model_core identities",
            passed=identity_err <= IDENTITY_TOL,
            measured=identity_err,
            tolerance=IDENTITY_TOL,
            detail="I(-1), theta_bound(T), -log p_cir/K vs exponent",
        ),
        CheckResult(
            name="mu -> 0 branch seam",
            passed=seam_err <= SEAM_TOL,
            measured=seam_err,
            tolerance=SEAM_TOL,
            detail=f"mu = +/-{SEAM_MU:g}",
        ),
    ]


def check_exponent_agreement(scale: SuiteScale) -> list[CheckResult]:
    """Closed-form exponent vs quadrature of w*, the solver minimum and J_T(u*)."""
    worst_quad = worst_solver = worst_rate = 0.0
    for mu, gamma in scale.combos:
        params = _params(mu, gamma)
        exponent = asymptotic_exponent(params)
        control = optimal_control_grid(params, scale.grid_points + 1)
        quadrature = 0.5 * trapezoid(control.values ** 2, control.grid)
        _, solver_action = best_theta(params, scale.grid_points)
        rate = richardson_rate(
            lambda t, p=params: most_likely_path_values(p, t), params, scale.richardson_intervals
        )
        worst_quad = max(worst_quad, _rel(quadrature, exponent))
        worst_solver = max(worst_solver, _rel(solver_action, exponent))
        worst_rate = max(worst_rate, _rel(rate, exponent))

    return [
        CheckResult(
            name="exponent vs 1/2 int w*^2",
            passed=worst_quad <= EXPONENT_TOL,
            measured=worst_quad,
            tolerance=EXPONENT_TOL,
            detail=f"{len(scale.combos)} (mu, gamma), N={scale.grid_points}",
        ),
        CheckResult(
            name="exponent vs best_theta action",
            passed=worst_solver <= EXPONENT_TOL,
            measured=worst_solver,
            tolerance=EXPONENT_TOL,
            detail=f"N={scale.grid_points}",
        ),
        CheckResult(
            name="exponent vs J_T(u*)",
            passed=worst_rate <= EXPONENT_TOL,
            measured=worst_rate,
            tolerance=EXPONENT_TOL,
            detail=f"Richardson, N={scale.richardson_intervals}",
        ),
    ]


def check_most_likely_path(scale: SuiteScale) -> list[CheckResult]:
    """u* against an adaptive ODE solution and against controlled_path(w*)."""
    worst_ode = worst_grid = 0.0
    for mu, gamma in scale.combos:
        params = _params(mu, gamma)

        def rhs(t, u, p=params):
            w = optimal_control_values(p, np.clip(t, 0.0, p.horizon_T))
            return p.mu * u + p.sigma * np.maximum(u, 0.0) ** p.gamma * w

        # stop short of T where u^gamma loses its Lipschitz constant
        t_end = 0.9 * params.horizon_T
        t_eval = np.linspace(0.0, t_end, 91)
        solution = solve_ivp(rhs, (0.0, t_end), [1.0], method="DOP853", t_eval=t_eval, rtol=1e-12, atol=1e-14)
        worst_ode = max(
            worst_ode,
            float(np.max(np.abs(solution.y[0] - most_likely_path_values(params, t_eval)))),
        )

        control = optimal_control_grid(params, scale.grid_points + 1)
        path = controlled_path(params, control)
        worst_grid = max(
            worst_grid,
            float(np.max(np.abs(path.values - most_likely_path_values(params, control.grid)))),
        )

    return [
        CheckResult(
            name="u* vs ODE solution",
            passed=worst_ode <= ODE_TOL,
            measured=worst_ode,
            tolerance=ODE_TOL,
            detail="sup over [0, 0.9T]",
        ),
        CheckResult(
            name="u* vs controlled_path(w*)",
            passed=worst_grid <= CONTROLLED_PATH_TOL,
            measured=worst_grid,
            tolerance=CONTROLLED_PATH_TOL,
            detail=f"sup over [0, T], N={scale.grid_points}",
        ),
    ]


def check_inclusion(scale: SuiteScale, seed: int, workers: int) -> list[CheckResult]:
    """{M_T < -K^(1-gamma)} is contained in {tau_0 <= T} for the Lamperti scheme."""
    results = []
    for gamma in (0.5, 0.75):
        params = _params(0.0, gamma)
        config = SimConfig(
            params=params,
            scale=ScaleParams.for_params(params, 1.0),
            scheme=Scheme.LAMPERTI,
            n_steps=scale.inclusion_steps,
            n_paths=scale.inclusion_paths,
            seed=seed,
        )
        violations = coupled_inclusion_check(config, workers=workers)
        results.append(
            CheckResult(
                name=f"coupled inclusion gamma={gamma:g}",
                passed=violations == 0,
                measured=violations,
                tolerance=0,
                detail=f"{scale.inclusion_paths} paths, {scale.inclusion_steps} steps",
            )
        )
    return results


def _oracle_rows(scale: SuiteScale, seed: int, workers: int) -> list[tuple[ModelParams, ScaleParams, float, float]]:
    rows = []
    for mu in (0.0, 0.1, -0.1):
        params = _params(mu, 0.5)
        for K in (1.0, 2.0, 4.0):
            config = SimConfig(
                params=params,
                scale=ScaleParams.for_params(params, K),
                scheme=Scheme.EXACT_CIR,
                n_paths=scale.oracle_paths,
                seed=seed,
            )
            estimate = estimate_ruin(config, workers=workers)
            rows.append((params, config.scale, estimate.p_hat, estimate.stderr))
    return rows


def check_cir_oracle(
    scale: SuiteScale,
    seed: int,
    workers: int,
    rows: list[tuple[ModelParams, ScaleParams, float, float]],
) -> list[CheckResult]:
    """The gamma = 1/2 closed form against exact-transition and time-stepped simulation."""
    worst = 0.0
    for params, scale_params, p_hat, stderr in rows:
        exact = exact_ruin_cir(params, scale_params)
        worst = max(worst, abs(p_hat - exact) / max(stderr, 1e-300))

    params = _params(0.0, 0.5)
    config = SimConfig(
        params=params,
        scale=ScaleParams.for_params(params, 1.0),
        scheme=Scheme.LAMPERTI,
        n_steps=scale.scheme_steps,
        n_paths=scale.scheme_paths,
        seed=seed,
    )
    stepped = estimate_ruin(config, workers=workers)
    exact = exact_ruin_cir(params, config.scale)
    allowance = ORACLE_SIGMAS * stepped.stderr + SCHEME_BIAS * exact
    stepped_err = abs(stepped.p_hat - exact)

    return [
        CheckResult(
            name="exact CIR MC vs closed form",
            passed=worst <= ORACLE_SIGMAS,
            measured=worst,
            tolerance=ORACLE_SIGMAS,
            detail=f"9 configs, {scale.oracle_paths} paths, in stderr units",
        ),
        CheckResult(
            name="stepped CIR MC vs closed form",
            passed=stepped_err <= allowance,
            measured=stepped_err,
            tolerance=allowance,
            detail=f"lamperti, {scale.scheme_steps} steps, K=1",
        ),
    ]


def check_gaussian_lower_bound(
    scale: SuiteScale,
    seed: int,
    workers: int,
    rows: list[tuple[ModelParams, ScaleParams, float, float]],
) -> list[CheckResult]:
    """p_hat + 3 stderr >= Phi(-K^(1-gamma)/sqrt(<M>_T)) on CIR and gamma = 3/4 runs."""
    margins = [
        p_hat + LOWER_BOUND_SIGMAS * stderr - gaussian_lower_bound(params, scale_params)
        for params, scale_params, p_hat, stderr in rows
    ]

    params = _params(0.0, 0.75)
    for K in (1.0, 2.0, 4.0):
        config = SimConfig(
            params=params,
            scale=ScaleParams.for_params(params, K),
            scheme=Scheme.LAMPERTI,
            n_steps=scale.lower_bound_steps,
            n_paths=scale.lower_bound_paths,
            seed=seed,
            importance_sampling=True,
        )
        estimate = estimate_ruin_is(config, workers=workers)
        margins.append(
            estimate.p_hat + LOWER_BOUND_SIGMAS * estimate.stderr - gaussian_lower_bound(params, config.scale)
        )

    worst = min(margins)
    return [
        CheckResult(
            name="Gaussian lower bound",
            passed=worst >= 0,
            measured=worst,
            tolerance=0.0,
            detail=f"{len(margins)} estimates, smallest p_hat + 3se - bound",
        )
    ]


def run_validate(seed: int, quick: bool = False, workers: int = 1) -> ValidationReport:
    """Run every oracle check in order.

    Order: model_core identities, exponent agreement across modules, u*
    integration, coupled inclusion, gamma = 1/2 oracle, Gaussian lower bound.
    Failures are report content, not exceptions.

    Args:
        seed: Root seed of every simulation in the suite
        quick: Use the reduced scale
        workers: Threads per Monte Carlo estimate

    Returns:
        ValidationReport
    """
    scale = QUICK_SCALE if quick else FULL_SCALE
    steps: list[tuple[str, Callable[[], list[CheckResult]]]] = [
        ("model_core identities", lambda: check_model_identities(scale)),
        ("exponent agreement", lambda: check_exponent_agreement(scale)),
        ("most likely path", lambda: check_most_likely_path(scale)),
        ("coupled inclusion", lambda: check_inclusion(scale, seed, workers)),
    ]

    checks: list[CheckResult] = []
    for label, step in steps:
        logger.info("validate: %s", label)
        checks.extend(step())

    logger.info("validate: gamma=1/2 oracle")
    rows = _oracle_rows(scale, seed, workers)
    checks.extend(check_cir_oracle(scale, seed, workers, rows))
    logger.info("validate: Gaussian lower bound")
    checks.extend(check_gaussian_lower_bound(scale, seed, workers, rows))

    report = ValidationReport(seed=seed, quick=quick, checks=checks)
    logger.info("validate: %d/%d checks passed", len(checks) - len(report.failures), len(checks))
    return report
