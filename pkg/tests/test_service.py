"""HTTP service: batch simulation endpoints and live pipeline sessions."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from eldersim.service.app import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_simulate_fall_scenario_returns_metrics_and_report(client):
    response = client.post(
        "/simulate", json={"scenario": "fall", "duration_s": 120, "seed": 7}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["metrics"]["alerts"]["RED"] >= 1
    assert body["digest"] == body["metrics"]["digest"]
    assert "LATENCY BREAKDOWN" in body["report_text"]


def test_simulate_is_deterministic(client):
    payload = {"scenario": "normal", "duration_s": 60, "seed": 11}
    first = client.post("/simulate", json=payload).json()
    second = client.post("/simulate", json=payload).json()
    assert first["digest"] == second["digest"]


def test_simulate_accepts_inline_trace(client):
    generated = client.post(
        "/scenarios", json={"scenario": "hypoxia", "duration_s": 60, "seed": 3}
    ).json()
    response = client.post(
        "/simulate", json={"trace_text": generated["trace_text"], "seed": 3}
    )
    assert response.status_code == 200
    assert response.json()["metrics"]["windows"] > 0


def test_simulate_requires_some_input(client):
    assert client.post("/simulate", json={}).status_code == 422


def test_simulate_outage_scenario_applies_link_overrides(client):
    response = client.post(
        "/simulate", json={"scenario": "outage", "duration_s": 90, "seed": 5}
    )
    assert response.status_code == 200
    uplink = response.json()["metrics"]["uplink"]
    assert uplink["replayed"] > 0


def test_scenarios_endpoint_reports_counts(client):
    response = client.post(
        "/scenarios", json={"scenario": "normal", "duration_s": 30, "seed": 2}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["reading_count"] > 0
    assert body["trace_text"].startswith("#")


def test_unknown_scenario_is_422(client):
    response = client.post(
        "/scenarios", json={"scenario": "earthquake", "duration_s": 30, "seed": 2}
    )
    assert response.status_code == 422


def test_reports_endpoint_round_trips_metrics(client):
    sim = client.post(
        "/simulate", json={"scenario": "normal", "duration_s": 30, "seed": 2}
    ).json()
    response = client.post("/reports", json={"metrics": sim["metrics"]})
    assert response.status_code == 200
    assert response.json()["report_text"] == sim["report_text"]


# ----------------------------------------------------------------------
# sessions
# ----------------------------------------------------------------------

def _create_session(client, config=None) -> str:
    response = client.post("/sessions", json={"config": config})
    assert response.status_code == 200
    return response.json()["session_id"]


def test_session_reading_and_advance_flow(client):
    session = _create_session(client)
    for t in range(0, 3000, 100):
        ack = client.post(
            f"/sessions/{session}/readings",
            json={
                "t_ms": t,
                "sensor_id": "wb-1",
                "sensor_type": "wristband",
                "payload": {"ax": 0.0, "ay": 0.0, "az": 9.81,
                            "gx": 0.0, "gy": 0.0, "gz": 0.0},
            },
        )
        assert ack.json()["accepted"] is True
    response = client.post(f"/sessions/{session}/advance", json={"now_ms": 3000})
    body = response.json()
    assert body["emitted"] is True
    assert body["level"] == "NONE"
    assert body["fusion"]["confidence"] == pytest.approx(0.6)


def test_session_rejects_mismatched_payload(client):
    session = _create_session(client)
    ack = client.post(
        f"/sessions/{session}/readings",
        json={
            "t_ms": 0,
            "sensor_id": "cam-1",
            "sensor_type": "camera",
            "payload": {"ax": 0.0, "ay": 0.0, "az": 9.81,
                        "gx": 0.0, "gy": 0.0, "gz": 0.0},
        },
    )
    assert ack.status_code == 200
    body = ack.json()
    assert body["accepted"] is False
    assert body["rejected_total"] == 1


def test_advance_within_hop_is_not_emitted(client):
    session = _create_session(client)
    assert client.post(f"/sessions/{session}/advance",
                       json={"now_ms": 3000}).json()["emitted"]
    assert not client.post(f"/sessions/{session}/advance",
                           json={"now_ms": 3200}).json()["emitted"]


def test_manual_trigger_returns_full_red_plan(client):
    session = _create_session(client)
    response = client.post(f"/sessions/{session}/manual-trigger", json={"now_ms": 5000})
    assert response.status_code == 200
    alert = response.json()
    assert alert["level"] == "RED"
    assert alert["source"] == "manual"
    roles = {entry["role"] for entry in alert["plan"]}
    assert roles == {"family", "doctor", "volunteer"}
    channels = {entry["channel"] for entry in alert["plan"]}
    assert channels == {"sms", "push", "call"}


def test_alert_listing_accumulates(client):
    session = _create_session(client)
    client.post(f"/sessions/{session}/manual-trigger", json={"now_ms": 1000})
    client.post(f"/sessions/{session}/manual-trigger", json={"now_ms": 2000})
    alerts = client.get(f"/sessions/{session}/alerts").json()
    assert len(alerts) == 2
    assert alerts[0]["alert_id"] != alerts[1]["alert_id"]


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope/alerts").status_code == 404
    assert client.post("/sessions/nope/advance", json={"now_ms": 0}).status_code == 404


def test_session_config_overrides_apply(client):
    session = _create_session(client, config={"contacts": [
        {"contact_id": "f1", "role": "family", "has_app": True},
    ]})
    alert = client.post(f"/sessions/{session}/manual-trigger",
                        json={"now_ms": 0}).json()
    recipients = {entry["recipient"] for entry in alert["plan"]}
    assert recipients == {"f1"}


def test_bad_session_config_is_422(client):
    response = client.post("/sessions", json={"config": {"hop_ms": -5}})
    assert response.status_code == 422
