import pytest
from fastapi.testclient import TestClient

from server.main import app

KEY = {"x-api-key": "test-key"}


@pytest.fixture
def client(monkeypatch):
    monkeypatch.setenv("MOP_API_KEY", "test-key")
    with TestClient(app) as c:
        yield c


def test_health(client):
    assert client.get("/health").json() == {"ok": True}


def test_exceptional(client):
    resp = client.post("/exceptional", json={"op": "exceptional-x2", "nmax": 6}, headers=KEY)
    assert resp.status_code == 200
    assert resp.json()["values"]["exceptional degrees"] == "{1,2}"


def test_key_is_required(client):
    assert client.post("/exceptional", json={"op": "dx"}).status_code == 401
    assert client.post("/exceptional", json={"op": "dx"}, headers={"x-api-key": "nope"}).status_code == 401


def test_bad_operator(client):
    assert client.post("/exceptional", json={"op": "dx*0.5"}, headers=KEY).status_code == 422


def test_unknown_example(client):
    resp = client.post("/reproduce", json={"example": "bessel"}, headers=KEY)
    assert resp.status_code == 404


def test_decimal_parameter(client):
    resp = client.post("/reproduce", json={"example": "hermite", "params": {"a": "0.5"}}, headers=KEY)
    assert resp.status_code == 422


def test_reproduce(client):
    body = {"example": "hermite", "params": {"a": "2"}, "specializations": 0, "nwin": 8}
    resp = client.post("/reproduce", json=body, headers=KEY)
    assert resp.status_code == 200
    data = resp.json()
    assert data["task"] == "reproduce hermite"
    assert all(c["status"] == "pass" for c in data["certificates"])

