import pytest

from shared import telemetry


@pytest.fixture
def posts(monkeypatch):
    sent = []

    def post(url, json, headers, timeout):
        sent.append((url, json, headers))

    monkeypatch.setattr(telemetry.requests, "post", post)
    monkeypatch.setattr(telemetry, "FLUSH_INTERVAL", 60.0)
    monkeypatch.setenv("MOP_TELEMETRY_URL", "http://sink/")
    monkeypatch.setenv("MOP_TELEMETRY_KEY", "secret")
    yield sent
    telemetry.flush()


def test_disabled_without_a_sink(monkeypatch):
    monkeypatch.delenv("MOP_TELEMETRY_URL", raising=False)
    telemetry.init("s1")
    assert not telemetry.enabled()
    telemetry.say("[cli] nothing to ship")
    telemetry.report_summary("mops", "pass", {"pass": 1})
    telemetry.flush()


def test_lines_are_tagged_scrubbed_and_batched(posts):
    telemetry.init("s2")
    telemetry.log("[reproduce] a=123456789012345678901/2", "[server] key=abc", "untagged")
    telemetry.flush()
    ((url, body, headers),) = posts
    assert url == "http://sink/records"
    assert headers == {"Authorization": "Bearer secret"}
    assert body == {"session": "s2", "records": [
        {"kind": "line", "tag": "reproduce", "text": "a=123456789012.../2"},
        {"kind": "line", "tag": "server", "text": "key=***"},
        {"kind": "line", "tag": "", "text": "untagged"},
    ]}


def test_report_summaries_share_the_batch(posts):
    telemetry.init("s3")
    telemetry.say("[cli] reproduce: fail")
    telemetry.report_summary("reproduce hermite", "fail", {"pass": 40, "fail": 1})
    telemetry.flush()
    records = posts[0][1]["records"]
    assert [r["kind"] for r in records] == ["line", "report"]
    assert records[1]["counts"] == {"fail": 1, "pass": 40}


def test_large_buffers_are_split(posts):
    telemetry.init("s4")
    telemetry.log(*(f"[pipeline] task {i}" for i in range(telemetry.MAX_BATCH + 5)))
    telemetry.flush()
    assert [len(body["records"]) for _, body, _ in posts] == [telemetry.MAX_BATCH, 5]


def test_sink_failures_are_swallowed(monkeypatch, posts, capsys):
    def boom(url, json, headers, timeout):
        raise ConnectionError("down")

    telemetry.init("s5")
    monkeypatch.setattr(telemetry.requests, "post", boom)
    telemetry.report_summary("mops", "pass", {})
    telemetry.flush()
    assert not telemetry.enabled()
    assert "post of 1 record(s) failed" in capsys.readouterr().err
