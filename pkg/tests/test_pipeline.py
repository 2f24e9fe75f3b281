import threading

import pytest

from mopcheck import config
from mopcheck.pipeline import parallel_map


def test_results_keep_input_order(monkeypatch):
    monkeypatch.delenv("MOP_NO_PARALLEL")
    assert parallel_map(lambda n: n * n, range(20), workers=4) == [n * n for n in range(20)]


def test_first_error_is_raised(monkeypatch):
    monkeypatch.delenv("MOP_NO_PARALLEL")

    def fn(n):
        if n in (3, 7):
            raise ValueError(f"bad {n}")
        return n

    with pytest.raises(ValueError, match="bad 3"):
        parallel_map(fn, range(10), workers=3)


def test_serial_mode_stays_on_the_calling_thread():
    main = threading.get_ident()
    assert parallel_map(lambda _: threading.get_ident(), range(5), workers=4) == [main] * 5


def test_empty_input():
    assert parallel_map(lambda n: n, []) == []


def test_worker_count(monkeypatch):
    monkeypatch.setenv("MOP_WORKERS", "7")
    assert config.worker_count() == 7
    monkeypatch.setenv("MOP_WORKERS", "zero")
    assert config.worker_count() == config.DEFAULT_WORKERS


def test_require_env(monkeypatch):
    monkeypatch.delenv("MOP_API_KEY", raising=False)
    with pytest.raises(EnvironmentError, match="MOP_API_KEY"):
        config.require_env(config.SERVER_REQUIRED_ENV_VARS)
    monkeypatch.setenv("MOP_API_KEY", "k")
    config.require_env(config.SERVER_REQUIRED_ENV_VARS)
