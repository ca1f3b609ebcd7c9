"""Data transformation utilities: domain objects to tidy DataFrames and CSV files."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from errors import OutputPathError
from rate_function import AbsorbedPath, ControlFunction

PATH_COLUMNS = ["t", "u"]
CONTROL_COLUMNS = ["t", "w_numeric", "w_closed_form"]
MC_PATH_COLUMNS = ["path_id", "t", "x"]
PROFILE_COLUMNS = ["t", "profile", "u_star"]


def check_output_dir(path: Optional[str | Path]) -> None:
    """Raise OutputPathError when the directory of an output file is missing.

    Args:
        path: Output file path, or None for "no output"
    """
    if path is None:
        return
    parent = Path(path).parent
    if not parent.is_dir():
        raise OutputPathError(path, f"directory {parent} does not exist")


def write_csv(df: pd.DataFrame, path: str | Path) -> None:
    """Write a DataFrame as UTF-8 CSV with LF endings and `nan` for missing values.

    Args:
        df: Table to write
        path: Destination file; its directory must exist
    """
    check_output_dir(path)
    try:
        df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8", na_rep="nan")
    except OSError as e:
        raise OutputPathError(path, str(e)) from e


def read_csv(path: str | Path, columns: Sequence[str]) -> pd.DataFrame:
    """Read a CSV written by write_csv and check its header.

    Floats are parsed with round-trip precision so written values come back
    bit for bit.

    Args:
        path: Source file
        columns: Expected header

    Returns:
        DataFrame with exactly the expected columns
    """
    try:
        df = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except (OSError, pd.errors.EmptyDataError) as e:
        raise OutputPathError(path, str(e)) from e
    if list(df.columns) != list(columns):
        raise OutputPathError(path, f"expected header {','.join(columns)}, got {','.join(df.columns)}")
    return df


def header_of(path: str | Path) -> list[str]:
    """Column names of a CSV file."""
    try:
        return list(pd.read_csv(path, nrows=0).columns)
    except (OSError, pd.errors.EmptyDataError) as e:
        raise OutputPathError(path, str(e)) from e


def models_to_dataframe(models: Sequence[BaseModel], columns: Sequence[str]) -> pd.DataFrame:
    """Tabulate pydantic records, keeping the given column order."""
    return pd.DataFrame([m.model_dump() for m in models], columns=list(columns))


def path_to_dataframe(path: AbsorbedPath) -> pd.DataFrame:
    """Convert an absorbed path to a `t,u` table."""
    return pd.DataFrame({"t": path.grid, "u": path.values})


def dataframe_to_path(df: pd.DataFrame) -> AbsorbedPath:
    """Rebuild an absorbed path from a `t,u` table."""
    return AbsorbedPath(grid=df["t"].to_numpy(dtype=float), values=df["u"].to_numpy(dtype=float))


def control_to_dataframe(control: ControlFunction, closed_form: np.ndarray) -> pd.DataFrame:
    """Solved control next to the closed-form control on the same grid.

    Args:
        control: Numerically solved control
        closed_form: w* evaluated on control.grid

    Returns:
        DataFrame with columns t, w_numeric, w_closed_form
    """
    closed_form = np.asarray(closed_form, dtype=float)
    if closed_form.shape != control.grid.shape:
        raise ValueError("closed-form values do not match the control grid")
    return pd.DataFrame({
        "t": control.grid,
        "w_numeric": control.values,
        "w_closed_form": closed_form,
    })


def format_probability(value: float | None) -> str:
    """Format a probability for fixed-width output.

    Args:
        value: Probability or None

    Returns:
        Formatted string
    """
    if value is None:
        return "N/A"
    return f"{value:.6e}"


def format_rate(value: float | None) -> str:
    """Format a rate or normalized log; inf and None are spelled out."""
    if value is None:
        return "N/A"
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:+.6f}"
