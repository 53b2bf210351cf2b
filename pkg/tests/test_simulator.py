"""Simulator: channel model, determinism, latency accounting, outages."""

from __future__ import annotations

import json
import random

import pytest

from eldersim.config import ChannelModel, SimConfig
from eldersim.errors import ConfigError
from eldersim.scenarios import generate_scenario, scenario_overrides
from eldersim.simulator import compute_digest, run, simulate_channel, write_outputs


def _fall_run(seed: int = 42, duration: int = 120):
    config = SimConfig(seed=seed)
    readings = generate_scenario("fall", duration, seed=7)
    return run(config, readings)


# ----------------------------------------------------------------------
# simulate_channel
# ----------------------------------------------------------------------

def test_zero_jitter_is_exact_mean():
    model = ChannelModel(mean_ms=1500.0, jitter_ms=0.0, success_probability=1.0)
    rng = random.Random(1)
    latency, delivered = simulate_channel(model, rng)
    assert latency == 1500.0
    assert delivered is True


def test_certain_channel_always_delivers():
    model = ChannelModel(mean_ms=800.0, jitter_ms=200.0, success_probability=1.0)
    rng = random.Random(2)
    assert all(simulate_channel(model, rng)[1] for _ in range(500))


def test_latency_stays_within_jitter_band():
    model = ChannelModel(mean_ms=1500.0, jitter_ms=300.0, success_probability=0.985)
    rng = random.Random(3)
    for _ in range(2000):
        latency, _ = simulate_channel(model, rng)
        assert 1200.0 <= latency <= 1800.0


def test_channel_model_validation():
    with pytest.raises(ConfigError):
        ChannelModel(mean_ms=0.0, jitter_ms=0.0, success_probability=1.0)
    with pytest.raises(ConfigError):
        ChannelModel(mean_ms=100.0, jitter_ms=150.0, success_probability=1.0)
    with pytest.raises(ConfigError):
        ChannelModel(mean_ms=100.0, jitter_ms=10.0, success_probability=1.5)


# ----------------------------------------------------------------------
# run
# ----------------------------------------------------------------------

def test_identical_runs_have_identical_digests():
    first = _fall_run()
    second = _fall_run()
    assert first.metrics.digest == second.metrics.digest
    assert first.logs == second.logs


def test_different_seed_changes_digest():
    assert _fall_run(seed=1).metrics.digest != _fall_run(seed=2).metrics.digest


def test_fall_run_reaches_red_quickly():
    result = _fall_run()
    assert result.metrics.alerts_by_level["RED"] >= 1
    e2e = result.metrics.stage_samples["end_to_end"]
    assert e2e and max(e2e) < 3000.0


def test_end_to_end_decomposes_into_stage_sum():
    result = _fall_run()
    for entry in result.alert_latencies:
        assert entry["end_to_end"] == pytest.approx(
            sum(v for k, v in entry["stages"].items()), abs=1e-9
        )


def test_normal_run_raises_no_alerts():
    config = SimConfig()
    readings = generate_scenario("normal", 120, seed=7)
    result = run(config, readings)
    assert sum(result.metrics.alerts_by_level.values()) == 0
    assert result.metrics.manual_alerts == 0


def test_windows_count_matches_trace_span():
    config = SimConfig()
    readings = generate_scenario("normal", 60, seed=7)
    result = run(config, readings)
    # First window ends at 3 s, then one per second up to the rounded end.
    assert result.metrics.windows == 58


def test_manual_trigger_event_is_processed():
    config = SimConfig(manual_triggers_ms=[30_000])
    readings = generate_scenario("normal", 60, seed=7)
    result = run(config, readings)
    assert result.metrics.manual_alerts == 1
    manual = [e for e in result.alert_latencies if e["source"] == "manual"]
    assert manual and manual[0]["level"] == "RED"
    assert any('"source":"manual"' in line for line in result.logs["alerts"])


def test_outage_buffers_then_replays_without_loss():
    overrides = scenario_overrides("outage", 120)
    config = SimConfig(link_outages=overrides["link_outages"])
    readings = generate_scenario("outage", 120, seed=7)
    result = run(config, readings)
    uplink = result.metrics.uplink
    assert uplink["replayed"] > 0
    assert uplink["dropped"] == 0
    assert uplink["sequence_gaps"] == 0
    assert uplink["cloud_received"] == uplink["published"]


def test_notifications_reach_terminal_states():
    result = _fall_run()
    lines = result.logs["notifications"]
    assert lines
    terminal = {"delivered", "read", "failed", "answered", "voicemail"}
    last_status: dict[str, str] = {}
    for line in lines:
        record = json.loads(line)
        last_status[record["record_id"]] = record["status"]
    assert all(status in terminal for status in last_status.values())


def test_write_outputs_produces_expected_files(tmp_path):
    result = _fall_run()
    written = write_outputs(result, tmp_path)
    names = sorted(p.name for p in written)
    assert names == sorted(
        ["fusion.log", "alerts.log", "notifications.log", "uplink.log",
         "metrics.json", "report.txt"]
    )
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["digest"] == result.metrics.digest


def test_digest_covers_all_logs():
    result = _fall_run()
    tampered = {name: list(lines) for name, lines in result.logs.items()}
    tampered["uplink"] = tampered["uplink"][:-1]
    assert compute_digest(tampered) != result.metrics.digest


def test_wall_clock_not_written_to_outputs(tmp_path):
    result = _fall_run()
    write_outputs(result, tmp_path)
    for path in tmp_path.iterdir():
        assert "wall" not in path.read_text()


def test_quiet_run_dispatches_nothing():
    config = SimConfig()
    readings = generate_scenario("normal", 60, seed=7)
    result = run(config, readings)
    assert result.logs["notifications"] == []
    assert result.metrics.stage_samples["end_to_end"] == []


def test_empty_trace_runs_cleanly():
    result = run(SimConfig(), [])
    assert result.metrics.windows == 0
    assert result.metrics.readings_ingested == 0
    assert result.logs["fusion"] == []


def test_send_times_advance_monotonically():
    overrides = scenario_overrides("outage", 120)
    config = SimConfig(link_outages=overrides["link_outages"])
    readings = generate_scenario("outage", 120, seed=7)
    result = run(config, readings)
    sent_times = [
        json.loads(line)["sent_at"]
        for line in result.logs["uplink"]
        if json.loads(line)["outcome"] in ("sent", "replayed")
    ]
    assert sent_times == sorted(sent_times)
