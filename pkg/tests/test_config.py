"""Tests for configuration loading."""

import pytest

import config
from config import DEFAULT_SEED, load_config_file, parse_k_list, resolve_settings
from errors import OutputPathError


@pytest.fixture(autouse=True)
def clear_caches(monkeypatch):
    monkeypatch.delenv("RUIN_SEED", raising=False)
    monkeypatch.delenv("RUIN_WORKERS", raising=False)
    config.get_default_seed.cache_clear()
    config.get_default_workers.cache_clear()
    yield
    config.get_default_seed.cache_clear()
    config.get_default_workers.cache_clear()


def test_defaults():
    settings = resolve_settings({})
    assert settings["seed"] == DEFAULT_SEED
    assert settings["gamma"] == 0.5
    assert settings["scheme"] == "lamperti"
    assert settings["n_paths"] == 100_000
    assert settings["is"] is False


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("RUIN_SEED", "42")
    assert resolve_settings({})["seed"] == 42
    assert resolve_settings({"seed": 7})["seed"] == 7


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("RUIN_WORKERS", "4")
    assert resolve_settings({})["workers"] == 4


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# sweep at gamma 3/4\n"
        "gamma = 0.75\n"
        "K_list = 1,2,4\n"
        "n_paths = 1e5\n"
        "is = true\n"
        "scheme = euler_full_truncation\n",
        encoding="utf-8",
    )
    values = load_config_file(path)
    assert values == {
        "gamma": 0.75,
        "K_list": "1,2,4",
        "n_paths": 100_000,
        "is": True,
        "scheme": "euler_full_truncation",
    }


def test_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("RUIN_SEED", "1")
    path = tmp_path / "run.cfg"
    path.write_text("seed = 2\nmu = 0.1\nsigma = 2\n", encoding="utf-8")
    settings = resolve_settings({"seed": None, "mu": 0.3}, path)
    assert settings["seed"] == 2
    assert settings["mu"] == 0.3
    assert settings["sigma"] == 2.0


def test_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("drift = 0.1\n", encoding="utf-8")
    with pytest.raises(ValueError, match="drift"):
        load_config_file(path)


def test_bad_boolean(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("is = maybe\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config_file(path)


def test_missing_file(tmp_path):
    with pytest.raises(OutputPathError):
        load_config_file(tmp_path / "absent.cfg")


def test_parse_k_list():
    assert parse_k_list("1, 2,4,") == [1.0, 2.0, 4.0]
    assert parse_k_list([1, 8]) == [1.0, 8.0]
