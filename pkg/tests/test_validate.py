"""Tests for the oracle suite."""

import pytest
from pydantic import ValidationError

from conftest import make_params
from config import DEFAULT_SEED
from validate import CheckResult, ValidationReport, run_validate

EXPECTED_ORDER = [
    "model_core identities",
    "mu -> 0 branch seam",
    "exponent vs 1/2 int w*^2",
    "exponent vs best_theta action",
    "exponent vs J_T(u*)",
    "u* vs ODE solution",
    "u* vs controlled_path(w*)",
    "coupled inclusion gamma=0.5",
    "coupled inclusion gamma=0.75",
    "exact CIR MC vs closed form",
    "stepped CIR MC vs closed form",
    "Gaussian lower bound",
]


@pytest.fixture(scope="module")
def quick_report() -> ValidationReport:
    return run_validate(DEFAULT_SEED, quick=True)


def test_quick_suite_passes(quick_report):
    failures = [(c.name, c.measured, c.tolerance) for c in quick_report.failures]
    assert quick_report.passed, failures


def test_check_order(quick_report):
    assert [c.name for c in quick_report.checks] == EXPECTED_ORDER


def test_deterministic_per_seed(quick_report):
    again = run_validate(DEFAULT_SEED, quick=True)
    assert again.model_dump() == quick_report.model_dump()


def test_other_seed_same_verdict():
    assert run_validate(DEFAULT_SEED + 1, quick=True).passed


def test_report_table(quick_report):
    table = quick_report.format_table()
    assert "FAIL" not in table
    assert table.count("PASS") == len(EXPECTED_ORDER)
    assert "all checks passed" in table


def test_failure_is_report_content():
    report = ValidationReport(
        seed=1,
        quick=True,
        checks=[
            CheckResult(name="a", passed=True, measured=0.0, tolerance=1.0),
            CheckResult(name="b", passed=False, measured=2.0, tolerance=1.0),
        ],
    )
    assert not report.passed
    assert [c.name for c in report.failures] == ["b"]
    assert "1 check(s) failed" in report.format_table()


def test_rejects_black_scholes_case():
    with pytest.raises(ValidationError):
        make_params(gamma=1.0)


@pytest.mark.slow
def test_full_suite_passes():
    report = run_validate(DEFAULT_SEED)
    assert report.passed, [(c.name, c.measured, c.tolerance) for c in report.failures]
