"""CEV ruin asymptotics - command-line entry point."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from charts import chart_for_table, write_figure
from config import parse_k_list, resolve_settings
from errors import CevRuinError, OutputPathError
from model_core import (
    ModelParams,
    ScaleParams,
    asymptotic_exponent,
    bracket_variance,
    exact_ruin_cir,
    gaussian_lower_bound,
    log_gaussian_lower_bound,
    normalized_noise,
    uses_limit_branch,
)
from montecarlo import Scheme, SimConfig, estimate_ruin, export_paths, ruin_path_profile
from rate_function import most_likely_path_grid, most_likely_path_values, optimal_control_values, rate_J, richardson_rate
from sweep import SweepSpec, run_sweep, summarize
from transformer import (
    check_output_dir,
    control_to_dataframe,
    format_probability,
    format_rate,
    path_to_dataframe,
    write_csv,
)
from validate import run_validate
from variational_solver import DiscreteControlProblem, best_theta, solve_least_norm

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "exact": "Closed forms for the given parameters",
    "mc": "Single Monte Carlo ruin estimate",
    "sweep": "K-sweep of normalized log ruin probabilities",
    "path": "Most likely path u* and its rate",
    "control": "Variational solver against the closed-form control",
    "validate": "Full oracle suite",
    "plot": "Render a result CSV as static HTML",
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", type=float, help="Drift rate (default: 0)")
    common.add_argument("--sigma", type=float, help="Volatility scale (default: 1)")
    common.add_argument("--gamma", type=float, help="Elasticity in [0.5, 1) (default: 0.5)")
    common.add_argument("--T", dest="T", type=float, help="Time horizon (default: 1)")
    common.add_argument("--K", dest="K", type=float, help="Initial condition (default: 1)")
    common.add_argument("--K-list", dest="K_list", help="Comma separated K values for sweep")
    common.add_argument("--scheme", choices=[s.value for s in Scheme], help="Simulation scheme")
    common.add_argument("--n-paths", dest="n_paths", type=int, help="Number of sample paths")
    common.add_argument("--n-steps", dest="n_steps", type=int, help="Time steps per path / grid intervals")
    common.add_argument("--seed", type=int, help="Root seed (env RUIN_SEED)")
    common.add_argument(
        "--is", dest="is", action="store_const", const=True, default=None,
        help="Importance sampling along the optimal control",
    )
    common.add_argument("--block-size", dest="block_size", type=int, help="Paths per RNG block")
    common.add_argument("--workers", type=int, help="Worker threads (env RUIN_WORKERS)")
    common.add_argument("--out", help="Output file")
    common.add_argument("--config", help="Flat key = value config file")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cev-ruin",
        description="Ruin asymptotics of the CEV diffusion",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    commands = {
        name: subparsers.add_parser(name, parents=[common], help=help_text)
        for name, help_text in SUBCOMMANDS.items()
    }

    commands["mc"].add_argument("--export-paths", dest="export_paths", help="CSV of the first paths (path_id,t,x)")
    commands["mc"].add_argument("--export-cap", dest="export_cap", type=int, help="Paths exported (default: 100)")
    commands["path"].add_argument(
        "--profile", action="store_true", help="Emit the mean ruined path next to u* instead"
    )
    commands["control"].add_argument(
        "--theta-points", dest="theta_points", type=int, help="Absorption times scanned (default: 100)"
    )
    commands["validate"].add_argument("--quick", action="store_true", help="Reduced scale")
    commands["plot"].add_argument("input", help="CSV written by path, control, sweep or mc")
    return parser


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"command", "config", "verbose", "profile", "quick", "input"}
    cli_values = {key: value for key, value in vars(args).items() if key not in skip}
    return resolve_settings(cli_values, args.config)


def build_params(settings: dict[str, Any]) -> ModelParams:
    return ModelParams(
        mu=settings["mu"],
        sigma=settings["sigma"],
        gamma=settings["gamma"],
        horizon_T=settings["T"],
    )


def build_sim_config(settings: dict[str, Any]) -> SimConfig:
    params = build_params(settings)
    return SimConfig(
        params=params,
        scale=ScaleParams.for_params(params, settings["K"]),
        scheme=Scheme(settings["scheme"]),
        n_steps=settings["n_steps"],
        n_paths=settings["n_paths"],
        seed=settings["seed"],
        importance_sampling=settings["is"],
        block_size=settings["block_size"],
    )


def _emit_text(text: str, out: Optional[str]) -> None:
    if out is None:
        print(text)
        return
    check_output_dir(out)
    try:
        Path(out).write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputPathError(out, str(e)) from e
    print(f"Wrote {out}")


def _emit_table(df: pd.DataFrame, out: Optional[str]) -> None:
    if out is None:
        print(df.to_csv(index=False, lineterminator="\n", na_rep="nan"), end="")
        return
    write_csv(df, out)
    print(f"Wrote {out} ({len(df)} rows)")


def cmd_exact(settings: dict[str, Any]) -> int:
    params = build_params(settings)
    scale = ScaleParams.for_params(params, settings["K"])
    record = {
        "asymptotic_exponent": asymptotic_exponent(params),
        "limit_value": -asymptotic_exponent(params),
        "bracket_variance_T": bracket_variance(params, params.horizon_T),
        "gaussian_lb": gaussian_lower_bound(params, scale),
        "log_gaussian_lb": log_gaussian_lower_bound(params, scale),
        "normalized_noise": normalized_noise(params, scale),
        "speed": scale.speed,
        "limit_branch": uses_limit_branch(params),
        "exact_ruin_cir": exact_ruin_cir(params, scale) if params.gamma == 0.5 else None,
    }
    _emit_text(json.dumps(record, indent=2), settings["out"])
    return 0


def cmd_mc(settings: dict[str, Any]) -> int:
    check_output_dir(settings["out"])
    check_output_dir(settings["export_paths"])
    config = build_sim_config(settings)
    estimate = estimate_ruin(config, workers=settings["workers"])
    if settings["export_paths"]:
        write_csv(export_paths(config, settings["export_cap"]), settings["export_paths"])
        print(f"Wrote {settings['export_paths']}")
    _emit_text(estimate.model_dump_json(), settings["out"])
    return 0


def cmd_sweep(settings: dict[str, Any]) -> int:
    params = build_params(settings)
    spec = SweepSpec(
        params=params,
        K_list=parse_k_list(settings["K_list"]),
        scheme=Scheme(settings["scheme"]),
        n_paths=settings["n_paths"],
        n_steps=settings["n_steps"],
        seed=settings["seed"],
        importance_sampling=settings["is"],
        output_path=settings["out"],
        block_size=settings["block_size"],
    )
    rows = run_sweep(spec, workers=settings["workers"], progress=sys.stderr.isatty())

    print(f"{'K':>10} {'p_hat':>14} {'stderr':>12} {'normalized_log':>16} {'limit':>10} {'gaussian_lb':>14}")
    for row in rows:
        print(
            f"{row.K:>10g} {format_probability(row.p_hat):>14} {row.stderr:>12.3e} "
            f"{format_rate(row.normalized_log):>16} {row.limit_value:>10.4f} "
            f"{format_probability(row.gaussian_lb):>14}"
        )
    summary = summarize(spec, rows)
    print(summary.model_dump_json(indent=2))
    return 0


def cmd_path(settings: dict[str, Any], profile: bool) -> int:
    check_output_dir(settings["out"])
    if profile:
        config = build_sim_config(settings)
        _emit_table(ruin_path_profile(config, workers=settings["workers"]), settings["out"])
        return 0

    params = build_params(settings)
    n_intervals = settings["n_steps"]
    path = most_likely_path_grid(params, n_intervals + 1)
    raw_rate = rate_J(path, params)
    extrapolated = richardson_rate(lambda t: most_likely_path_values(params, t), params, n_intervals)
    exponent = asymptotic_exponent(params)
    _emit_table(path_to_dataframe(path), settings["out"])
    logger.info(
        "J_T(u*) = %.10g (Richardson %.10g), asymptotic exponent %.10g",
        raw_rate, extrapolated, exponent,
    )
    if settings["out"] is not None:
        print(f"J_T(u*) grid:       {raw_rate:.10g}")
        print(f"J_T(u*) Richardson: {extrapolated:.10g}")
        print(f"asymptotic exponent: {exponent:.10g}")
    return 0


def cmd_control(settings: dict[str, Any]) -> int:
    check_output_dir(settings["out"])
    params = build_params(settings)
    n_steps = settings["n_steps"]
    theta, action_value = best_theta(params, n_steps, settings["theta_points"], settings["workers"])
    control = solve_least_norm(DiscreteControlProblem(params=params, n_steps=n_steps, theta=theta))
    closed_form = optimal_control_values(params, control.grid)
    _emit_table(control_to_dataframe(control, closed_form), settings["out"])
    if settings["out"] is not None:
        print(f"best theta: {theta:.6g}  action: {action_value:.10g}  exponent: {asymptotic_exponent(params):.10g}")
    return 0


def cmd_validate(settings: dict[str, Any], quick: bool) -> int:
    check_output_dir(settings["out"])
    report = run_validate(settings["seed"], quick=quick, workers=settings["workers"])
    print(report.format_table())
    if settings["out"] is not None:
        _emit_text(report.model_dump_json(indent=2), settings["out"])
    return 0 if report.passed else 1


def cmd_plot(settings: dict[str, Any], source: str) -> int:
    try:
        df = pd.read_csv(source)
    except (OSError, pd.errors.EmptyDataError) as e:
        raise OutputPathError(source, str(e)) from e
    out = settings["out"] or str(Path(source).with_suffix(".html"))
    write_figure(chart_for_table(df), out)
    print(f"Wrote {out}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        settings = _settings(args)
        if args.command == "exact":
            return cmd_exact(settings)
        if args.command == "mc":
            return cmd_mc(settings)
        if args.command == "sweep":
            return cmd_sweep(settings)
        if args.command == "path":
            return cmd_path(settings, args.profile)
        if args.command == "control":
            return cmd_control(settings)
        if args.command == "validate":
            return cmd_validate(settings, args.quick)
        return cmd_plot(settings, args.input)
    except (CevRuinError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
