import random

import pytest
from fastapi.testclient import TestClient

from psncredit.errors import Rejection
from psncredit.participant import Participant
from psncredit.service.app import create_app
from psncredit.service.client import HttpServerLink

INIT = dict(key_bits=128, tasks_per_window=2, c_min=1, c_max=3, horizon=500, seed=3)


@pytest.fixture
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture
def booted(client):
    resp = client.post("/server", json=INIT)
    assert resp.status_code == 200
    return client


def test_endpoints_409_before_server_exists(client):
    for path in ("/params", "/clock", "/storage"):
        assert client.get(path).status_code == 409
    assert client.post("/identity", json={"rid": "aa"}).status_code == 409


def test_create_server_returns_params(booted):
    params = booted.get("/params").json()
    assert params["c_max"] == 3
    assert params["tasks_per_window"] == 2
    assert params["n"] > 2**120


def test_clock_advance(booted):
    assert booted.get("/clock").json() == {"tick": 0}
    booted.post("/clock/advance", json={"ticks": 5})
    assert booted.get("/clock").json() == {"tick": 5}


def test_rejections_become_400_with_code(booted):
    resp = booted.post(
        "/task-request",
        json={"pseudonym": "aa", "task_index": 1, "tau": "00" * 32, "sig": 123},
    )
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_signature"


def test_identity_empty_rid_rejected(booted):
    resp = booted.post("/identity", json={"rid": ""})
    assert resp.status_code == 400
    assert resp.json()["code"] == "malformed_request"


def test_full_protocol_over_http(booted):
    link = HttpServerLink(booted)
    p = Participant(rid=b"node-http", link=link, secret_rng=random.Random(1))
    for i in (1, 2):
        p.request_task(i)
        grant = p.submit_report(i)
        assert grant.granted == 3
        while p.wallet:
            p.deposit_one()
    assert p.last_balance == 6
    assert booted.get(f"/balance/{b'node-http'.hex()}").json() == {"balance": 6}

    metrics = booted.get("/storage").json()
    assert metrics["peak_total"] <= metrics["bound"]


def test_typed_rejection_through_http(booted):
    link = HttpServerLink(booted)
    p = Participant(rid=b"node-a", link=link, secret_rng=random.Random(2))
    p.request_task(1)
    p.submit_report(1)
    stolen = p.wallet[0]
    thief = Participant(rid=b"node-b", link=link, secret_rng=random.Random(3))
    thief.wallet.append(stolen)
    with pytest.raises(Rejection) as exc_info:
        thief.deposit_one()
    assert exc_info.value.code == "identity_mismatch"


def test_operator_endpoints(booted):
    link = HttpServerLink(booted)
    p = Participant(rid=b"node-op", link=link, secret_rng=random.Random(4))
    for i in (1, 2):
        p.request_task(i)
        p.submit_report(i)
        while p.wallet:
            p.deposit_one()
        assert booted.post("/complete-task", json={"task_index": i}).status_code == 200
    assert booted.post("/expire-window", json={"window": 0}).status_code == 400  # too early
    booted.post("/clock/advance", json={"ticks": 500})
    assert booted.post("/expire-window", json={"window": 0}).status_code == 200


def test_run_endpoint(client):
    body = {
        "scenario": {"M": 1, "c_max": 2, "n_participants": 1, "key_bits": 128},
        "seed": 42,
    }
    first = client.post("/run", json=body).json()
    second = client.post("/run", json=body).json()
    assert first["summary"]["transcript_hash"] == second["summary"]["transcript_hash"]
    assert first["summary"]["violations"] == []
    assert first["lines"]


def test_run_endpoint_rejects_bad_scenario(client):
    resp = client.post("/run", json={"scenario": {"M": 0}, "seed": 1})
    assert resp.status_code == 400
    assert resp.json()["code"] == "scenario"


def test_attack_suite_endpoint(client):
    resp = client.post("/attack-suite", json={"seed": 5, "key_bits": 128})
    assert resp.status_code == 200
    body = resp.json()
    assert body["all_passed"] is True


def test_storage_grid_endpoint(client):
    resp = client.post("/storage-grid", json={"M": 1, "cmax": 5, "key_bits": 128})
    body = resp.json()
    assert body["within_bound"] is True
    assert body["bound"] == 7


def test_bench_endpoint(client):
    resp = client.post(
        "/bench", json={"tasks": [1, 2], "c": 2, "key_bits": 128, "repeat": 2}
    )
    body = resp.json()
    assert body["repeat"] == 2
    assert set(body["server_ms"]) == {"task-request", "report", "deposit"}
