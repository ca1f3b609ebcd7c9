"""Tests for plotly figures."""

import math

import pandas as pd
import pytest

from charts import chart_for_table, create_sweep_chart, write_figure
from errors import OutputPathError


@pytest.fixture
def sweep_df() -> pd.DataFrame:
    return pd.DataFrame({
        "K": [1.0, 2.0, 4.0],
        "p_hat": [0.135, 0.018, 0.0],
        "stderr": [1e-3, 4e-4, 0.0],
        "normalized_log": [-2.0, -2.0, math.nan],
        "limit_value": [-2.0, -2.0, -2.0],
        "gaussian_lb": [0.02275, 3.2e-3, 3.2e-5],
        "scheme": ["exact_cir"] * 3,
    })


def test_sweep_chart_shows_probability_on_log_axis(sweep_df):
    fig = create_sweep_chart(sweep_df)
    traces = {trace.name: trace for trace in fig.data}
    assert list(traces["p_hat"].x) == [1.0, 2.0]
    assert list(traces["log(p_hat) / K^{2(1-gamma)}"].x) == [1.0, 2.0]
    assert fig.layout.yaxis2.type == "log"
    assert fig.layout.xaxis.type == "log"


def test_dispatch_on_header(sweep_df):
    assert len(chart_for_table(sweep_df).data) == 4


def test_write_figure_missing_directory(sweep_df, tmp_path):
    with pytest.raises(OutputPathError):
        write_figure(create_sweep_chart(sweep_df), tmp_path / "missing" / "sweep.html")
