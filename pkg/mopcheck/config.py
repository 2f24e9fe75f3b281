"""Runtime configuration -- defaults plus optional overrides from .env / environment."""

import os
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parents[1]
load_dotenv(PROJECT_ROOT / ".env")

DEFAULT_N_WIN = 12
DEFAULT_ORDER_CAP = 6
DEFAULT_SPECIALIZATIONS = 3
DEFAULT_WORKERS = 4
DEFAULT_K_MAX = 6
PARAM_BOUND = 1000  # bound on numerators/denominators of random parameters

SERVER_REQUIRED_ENV_VARS = ["MOP_API_KEY"]


def parallel_enabled() -> bool:
    return os.environ.get("MOP_NO_PARALLEL", "") != "1"


def worker_count() -> int:
    raw = os.environ.get("MOP_WORKERS")
    if raw and raw.isdigit() and int(raw) > 0:
        return int(raw)
    return DEFAULT_WORKERS


def require_env(names: list[str]) -> None:
    missing = [v for v in names if not os.environ.get(v)]
    if missing:
        raise EnvironmentError(f"Missing env vars: {', '.join(missing)}")
