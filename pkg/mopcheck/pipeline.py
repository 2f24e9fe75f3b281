"""Worker pool for independent verification tasks (per n, per index, per specialization)."""

from __future__ import annotations

import queue
import threading
from typing import Callable, Iterable, TypeVar

from mopcheck import config
from shared import telemetry

T = TypeVar("T")
R = TypeVar("R")


def _worker(task_q: queue.Queue, results: dict, errors: dict, fn):
    while True:
        task = task_q.get()
        if task is None:
            break
        index, item = task
        try:
            results[index] = fn(item)
        except Exception as e:
            errors[index] = e


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None,
                 label: str = "pipeline") -> list[R]:
    """fn over items on a thread pool; results in input order, first error re-raised."""
    items = list(items)
    if workers is None:
        workers = config.worker_count()
    workers = min(workers, len(items))
    if workers <= 1 or not config.parallel_enabled():
        return [fn(item) for item in items]

    task_q: queue.Queue = queue.Queue()
    results: dict[int, R] = {}
    errors: dict[int, Exception] = {}
    for i, item in enumerate(items):
        task_q.put((i, item))

    threads = []
    for _ in range(workers):
        t = threading.Thread(target=_worker, args=(task_q, results, errors, fn), daemon=True)
        t.start()
        threads.append(t)
    # Sentinels signal exit once the queue drains
    for _ in range(workers):
        task_q.put(None)
    for t in threads:
        t.join()

    if errors:
        first = min(errors)
        telemetry.say(f"[{label}] {len(errors)} of {len(items)} tasks failed; first at index {first}")
        raise errors[first]
    return [results[i] for i in range(len(items))]
