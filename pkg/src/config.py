"""Configuration: defaults, .env overrides and flat key-value config files."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values, load_dotenv

from errors import OutputPathError

DEFAULT_SEED = 20240917

DEFAULTS: dict[str, Any] = {
    "mu": 0.0,
    "sigma": 1.0,
    "gamma": 0.5,
    "T": 1.0,
    "K": 1.0,
    "K_list": "1,2,4,8",
    "scheme": "lamperti",
    "n_paths": 100_000,
    "n_steps": 4000,
    "seed": DEFAULT_SEED,
    "is": False,
    "block_size": 4096,
    "workers": 1,
    "out": None,
    "export_paths": None,
    "export_cap": 100,
    "theta_points": 100,
}

_INT_KEYS = {"n_paths", "n_steps", "seed", "block_size", "workers", "export_cap", "theta_points"}
_FLOAT_KEYS = {"mu", "sigma", "gamma", "T", "K"}
_BOOL_KEYS = {"is"}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@lru_cache
def get_default_seed() -> int:
    """Get the default seed, honouring the RUIN_SEED environment variable.

    Returns:
        Seed as integer
    """
    load_dotenv()
    value = os.getenv("RUIN_SEED")
    if value is None or not value.strip():
        return DEFAULT_SEED
    return int(value)


@lru_cache
def get_default_workers() -> int:
    """Get the default worker count from RUIN_WORKERS (default: 1)."""
    load_dotenv()
    return max(1, int(os.getenv("RUIN_WORKERS", "1")))


def _coerce(key: str, raw: str) -> Any:
    text = raw.strip()
    if key in _INT_KEYS:
        return int(float(text)) if "e" in text.lower() else int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _BOOL_KEYS:
        lowered = text.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f"config key '{key}': expected a boolean, got '{raw}'")
    return text


def parse_k_list(raw: str | list[float]) -> list[float]:
    """Parse a comma separated K list ("1,2,4") into floats."""
    if isinstance(raw, str):
        return [float(item) for item in raw.split(",") if item.strip()]
    return [float(item) for item in raw]


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Load a flat key-value config file.

    Lines are ``key = value``; ``#`` starts a comment. Keys mirror the
    simulation and sweep field names.

    Args:
        path: Config file path

    Returns:
        Dictionary of typed values for the keys present in the file
    """
    path = Path(path)
    if not path.is_file():
        raise OutputPathError(path, "config file not found")

    values: dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        if key not in DEFAULTS:
            raise ValueError(f"{path}: unknown config key '{key}'")
        if raw is None:
            continue
        values[key] = _coerce(key, raw)
    return values


def resolve_settings(
    cli_values: dict[str, Any],
    config_path: Optional[str | Path] = None,
) -> dict[str, Any]:
    """Merge settings with precedence CLI > file > environment > defaults.

    Args:
        cli_values: Values given on the command line (None means "not given")
        config_path: Optional flat key-value config file

    Returns:
        Complete settings dictionary
    """
    settings = dict(DEFAULTS)
    settings["seed"] = get_default_seed()
    settings["workers"] = get_default_workers()

    if config_path is not None:
        settings.update(load_config_file(config_path))

    for key, value in cli_values.items():
        if value is not None:
            settings[key] = value

    return settings
