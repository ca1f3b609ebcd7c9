"""Chart generation with Plotly."""

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from errors import OutputPathError
from transformer import CONTROL_COLUMNS, MC_PATH_COLUMNS, PATH_COLUMNS, PROFILE_COLUMNS, check_output_dir


def create_path_chart(df: pd.DataFrame, title: str = "Most likely path to ruin") -> go.Figure:
    """Create chart of a normalized path u(t).

    Args:
        df: DataFrame with columns t, u

    Returns:
        Plotly figure
    """
    fig = go.Figure()
    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["u"],
            mode="lines",
            name="u*",
            line=dict(color="#2E86AB", width=2),
        )
    )
    fig.add_hline(y=0, line_dash="dot", line_color="gray")
    fig.update_layout(
        height=450,
        title=title,
        xaxis_title="t",
        yaxis_title="x / K",
        hovermode="x unified",
    )
    return fig


def create_control_chart(df: pd.DataFrame) -> go.Figure:
    """Create chart of the solved control against the closed form.

    Args:
        df: DataFrame with columns t, w_numeric, w_closed_form

    Returns:
        Plotly figure
    """
    fig = make_subplots(
        rows=2,
        cols=1,
        shared_xaxes=True,
        vertical_spacing=0.08,
        row_heights=[0.7, 0.3],
        subplot_titles=("Optimal control", "Difference"),
    )

    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["w_closed_form"],
            mode="lines",
            name="closed form",
            line=dict(color="#A23B72", width=2),
        ),
        row=1,
        col=1,
    )
    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["w_numeric"],
            mode="lines",
            name="numeric",
            line=dict(color="#F18F01", width=1, dash="dash"),
        ),
        row=1,
        col=1,
    )
    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["w_numeric"] - df["w_closed_form"],
            mode="lines",
            name="numeric - closed form",
            line=dict(color="#C73E1D", width=1),
        ),
        row=2,
        col=1,
    )

    fig.update_layout(
        height=600,
        showlegend=True,
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
        hovermode="x unified",
    )
    fig.update_yaxes(title_text="w", row=1, col=1)
    fig.update_xaxes(title_text="t", row=2, col=1)
    return fig


def create_sweep_chart(df: pd.DataFrame) -> go.Figure:
    """Create chart of normalized log-probabilities against the limit, with p_hat below.

    Args:
        df: Sweep table (K, p_hat, stderr, normalized_log, limit_value, gaussian_lb, scheme)

    Returns:
        Plotly figure
    """
    fig = make_subplots(
        rows=2,
        cols=1,
        shared_xaxes=True,
        vertical_spacing=0.08,
        row_heights=[0.6, 0.4],
        subplot_titles=("Normalized log probability", "Ruin probability"),
    )
    valid = df[df["normalized_log"].notna()]
    fig.add_trace(
        go.Scatter(
            x=valid["K"],
            y=valid["normalized_log"],
            mode="lines+markers",
            name="log(p_hat) / K^{2(1-gamma)}",
            line=dict(color="#2E86AB", width=2),
            hovertemplate="K=%{x}: %{y:.4f}<extra></extra>",
        ),
        row=1,
        col=1,
    )
    fig.add_trace(
        go.Scatter(
            x=df["K"],
            y=df["limit_value"],
            mode="lines",
            name="limit",
            line=dict(color="#C73E1D", dash="dash"),
        ),
        row=1,
        col=1,
    )

    # zero estimates have no place on a log axis
    positive = df[df["p_hat"] > 0]
    fig.add_trace(
        go.Scatter(
            x=positive["K"],
            y=positive["p_hat"],
            mode="markers",
            name="p_hat",
            marker=dict(color="#2E86AB"),
            error_y=dict(type="data", array=positive["stderr"], visible=True),
        ),
        row=2,
        col=1,
    )
    fig.add_trace(
        go.Scatter(
            x=df["K"],
            y=df["gaussian_lb"],
            mode="lines",
            name="Gaussian lower bound",
            line=dict(color="#F18F01", dash="dot"),
        ),
        row=2,
        col=1,
    )

    fig.update_layout(
        height=650,
        title=f"K-sweep ({df['scheme'].iloc[0]})" if len(df) else "K-sweep",
        hovermode="x unified",
    )
    fig.update_xaxes(type="log")
    fig.update_xaxes(title_text="K", row=2, col=1)
    fig.update_yaxes(title_text="normalized log", row=1, col=1)
    fig.update_yaxes(title_text="p_hat", type="log", row=2, col=1)
    return fig


def create_profile_chart(df: pd.DataFrame) -> go.Figure:
    """Create chart of the mean ruined path next to u*.

    Args:
        df: DataFrame with columns t, profile, u_star

    Returns:
        Plotly figure
    """
    fig = go.Figure()
    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["profile"],
            mode="lines",
            name="mean ruined path",
            line=dict(color="#F18F01", width=2),
        )
    )
    fig.add_trace(
        go.Scatter(
            x=df["t"],
            y=df["u_star"],
            mode="lines",
            name="u*",
            line=dict(color="#2E86AB", width=2, dash="dash"),
        )
    )
    fig.update_layout(
        height=450,
        title="Ruin path profile",
        xaxis_title="t",
        yaxis_title="x / K",
        hovermode="x unified",
    )
    return fig


def create_mc_paths_chart(df: pd.DataFrame) -> go.Figure:
    """Create chart of exported sample paths.

    Args:
        df: DataFrame with columns path_id, t, x

    Returns:
        Plotly figure
    """
    fig = go.Figure()
    for path_id, group in df.groupby("path_id", sort=True):
        fig.add_trace(
            go.Scatter(
                x=group["t"],
                y=group["x"],
                mode="lines",
                name=f"path {path_id}",
                line=dict(width=1),
                opacity=0.6,
                showlegend=False,
            )
        )
    fig.add_hline(y=0, line_dash="dot", line_color="gray")
    fig.update_layout(height=450, title="Sample paths", xaxis_title="t", yaxis_title="X")
    return fig


def chart_for_table(df: pd.DataFrame) -> go.Figure:
    """Pick the chart matching a table's header."""
    columns = list(df.columns)
    if columns == PATH_COLUMNS:
        return create_path_chart(df)
    if columns == CONTROL_COLUMNS:
        return create_control_chart(df)
    if columns == PROFILE_COLUMNS:
        return create_profile_chart(df)
    if columns == MC_PATH_COLUMNS:
        return create_mc_paths_chart(df)
    if "normalized_log" in columns and "K" in columns:
        return create_sweep_chart(df)
    raise ValueError(f"no chart for columns {','.join(columns)}")


def write_figure(fig: go.Figure, path: str | Path) -> None:
    """Write a figure as a self-contained HTML file."""
    check_output_dir(path)
    try:
        fig.write_html(str(path), include_plotlyjs=True)
    except OSError as e:
        raise OutputPathError(path, str(e)) from e
