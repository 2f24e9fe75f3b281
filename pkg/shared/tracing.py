"""Laminar tracing for mopcheck runs.

One span per CLI subcommand, parameter specialization and pipeline stage.
Tracing is best-effort -- failures never kill a verification run.
"""

import os
import sys
from contextlib import ExitStack, contextmanager

from lmnr import Laminar

_initialized = False


def init_tracing() -> bool:
    global _initialized
    if _initialized:
        return True
    key = os.environ.get("LMNR_PROJECT_API_KEY")
    if not key:
        return False
    try:
        Laminar.initialize(project_api_key=key)
        _initialized = True
    except Exception as e:
        print(f"[trace error] {e}", file=sys.stderr)
    return _initialized


@contextmanager
def span(name: str, input: dict | None = None):
    """Current-span context; a no-op when tracing is off."""
    with ExitStack() as stack:
        if _initialized:
            try:
                stack.enter_context(Laminar.start_as_current_span(
                    name=name, input=input or {}, span_type="DEFAULT",
                ))
            except Exception as e:
                print(f"[trace error] {e}", file=sys.stderr)
        yield


def set_output(value):
    if not _initialized:
        return
    try:
        Laminar.set_span_output(value)
    except Exception as e:
        print(f"[trace error] {e}", file=sys.stderr)
