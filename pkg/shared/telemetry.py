"""mopcheck telemetry -- tagged diagnostic lines on stderr, optionally batched to an HTTP sink.

Lines of the form ``[tag] text`` and per-run report summaries are buffered as
records and posted together to ``$MOP_TELEMETRY_URL/records``. A daemon thread
ships the buffer every FLUSH_INTERVAL seconds; ``flush()`` ships the rest and
stops it. Sink failures are reported on stderr and never fail a run.
"""

import os
import re
import sys
import threading

import requests

# Patterns stripped from log lines before sending them to the sink
_SCRUB = [
    (re.compile(r"(-?\d{12})\d{8,}"), r"\1..."),  # long rational literals
    (re.compile(r"key=\S+"), "key=***"),
]
_TAGGED = re.compile(r"\[([\w:-]+)\]\s*(.*)", re.S)

FLUSH_INTERVAL = 1.0
MAX_BATCH = 200


class _Sink:
    def __init__(self, session_id: str, url: str, key: str):
        self.session_id = session_id
        self.url = url.rstrip("/")
        self.key = key
        self.records: list[dict] = []
        self.lock = threading.Lock()
        self.stop = threading.Event()
        self.thread = threading.Thread(target=self._run, daemon=True)

    def add(self, record: dict):
        with self.lock:
            self.records.append(record)

    def _run(self):
        while not self.stop.wait(FLUSH_INTERVAL):
            self.ship()

    def ship(self):
        with self.lock:
            records, self.records = self.records, []
        for start in range(0, len(records), MAX_BATCH):
            self._post(records[start:start + MAX_BATCH])

    def _post(self, batch: list[dict]):
        body = {"session": self.session_id, "records": batch}
        try:
            requests.post(f"{self.url}/records", json=body,
                          headers={"Authorization": f"Bearer {self.key}"}, timeout=10)
        except Exception as e:
            print(f"[telemetry] post of {len(batch)} record(s) failed: {e}", file=sys.stderr)


_sink: _Sink | None = None


def init(session_id: str, sink_url: str | None = None):
    global _sink
    url = sink_url or os.environ.get("MOP_TELEMETRY_URL")
    key = os.environ.get("MOP_TELEMETRY_KEY")
    if not url or not key:
        _sink = None
        print("[telemetry] MOP_TELEMETRY_URL or MOP_TELEMETRY_KEY not set -- telemetry disabled", file=sys.stderr)
        return
    _sink = _Sink(session_id, url, key)
    print(f"[telemetry] targeting {_sink.url}", file=sys.stderr)
    _sink.thread.start()


def enabled() -> bool:
    return _sink is not None


def _line_record(line: str) -> dict:
    for pat, repl in _SCRUB:
        line = pat.sub(repl, line)
    m = _TAGGED.match(line)
    tag, text = (m.group(1), m.group(2)) if m else ("", line)
    return {"kind": "line", "tag": tag, "text": text}


def log(*lines: str):
    if _sink is None:
        return
    for line in lines:
        _sink.add(_line_record(line))


def say(msg: str):
    """Print a tagged line to stderr and buffer it for the sink."""
    print(msg, file=sys.stderr)
    log(msg)


def report_summary(task: str, status: str, counts: dict[str, int]):
    """One record per emitted report: overall status plus certificate counts by status."""
    if _sink is None:
        return
    _sink.add({"kind": "report", "task": task, "status": status, "counts": dict(sorted(counts.items()))})


def flush():
    global _sink
    if _sink is None:
        return
    _sink.stop.set()
    _sink.ship()
    _sink = None
