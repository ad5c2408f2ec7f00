"""Tests for the HTTP API."""

from __future__ import annotations

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from md_iqp.api import server
from md_iqp.experiments.registry import list_experiments
from md_iqp.settings import Settings


@pytest.fixture
def client(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> TestClient:
    """Client whose runs land under a temporary output directory."""
    monkeypatch.setattr(server, "settings", Settings(output_dir=str(tmp_path)))
    return TestClient(server.app)


def test_health(client: TestClient) -> None:
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_list_experiments(client: TestClient) -> None:
    resp = client.get("/experiments")
    assert resp.status_code == 200
    assert [e["name"] for e in resp.json()] == [n for n, _ in list_experiments()]


def test_run_experiment(client: TestClient, tmp_path: Path) -> None:
    body = {"name": "cx-count", "seed": 8, "params": {"sizes": [4], "D": 1, "instances": 1}}
    resp = client.post("/experiments/run", json=body)
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["status"] == 0
    assert Path(payload["run_dir"]) == tmp_path / "cx-count-8"
    assert {"metadata.json", "results.json", "cx_count.csv"} <= set(payload["files"])


def test_unknown_experiment_is_bad_request(client: TestClient, tmp_path: Path) -> None:
    resp = client.post("/experiments/run", json={"name": "nope"})
    assert resp.status_code == 400
    assert "unknown experiment" in resp.json()["detail"]
    assert list(tmp_path.iterdir()) == []


def test_invalid_params_are_bad_request(client: TestClient) -> None:
    resp = client.post("/experiments/run", json={"name": "cx-count", "params": {"bogus": 1}})
    assert resp.status_code == 400


def test_request_validation(client: TestClient) -> None:
    resp = client.post("/experiments/run", json={"name": "cx-count", "seed": -1})
    assert resp.status_code == 422
