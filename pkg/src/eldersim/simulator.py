"""Deterministic discrete-event replay of the full monitoring pipeline.

The event loop advances simulated time over a heap of (time, priority, seq)
keys; sensor readings are merged in by arrival time (source timestamp plus
the radio hop).  Every window tick runs fuse -> infer -> assess and, for any
non-NONE level, plans and dispatches notifications whose per-channel latency
and success come from one seeded generator.  Uplink envelopes ride the same
clock and honor the configured link outages.

Stage latencies are configured constants, so latency numbers are
machine-independent; host wall-clock time is returned separately and never
written into any output file.

Everything observable (logs, metrics, reports) is a pure function of
(config, trace, seed).
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import ChannelModel, SimConfig
from .escalation import (
    Alert,
    AlertSource,
    Channel,
    ChannelHub,
    ContactRole,
    DeliveryStatus,
    NotificationLog,
    NotificationPlan,
    dispatch,
)
from .pipeline import ElderPipeline, PipelineStep
from .types import AlertLevel, SensorReading
from .uplink import CloudCollector, UplinkClient

# Event priorities: at equal times, manual triggers outrank queued fusion work.
_PRIO_MANUAL = 0
_PRIO_LINK_DOWN = 1
_PRIO_LINK_UP = 2
_PRIO_TICK = 3
_PRIO_DELIVERY = 4
_PRIO_RESPONSE = 5
_PRIO_HEARTBEAT = 6

VOLUNTEER_RESPONSE_MIN_MS = 2000
VOLUNTEER_RESPONSE_MAX_MS = 8000

_STAGES = ("ble", "fusion", "inference", "risk", "dispatch", "channel", "end_to_end")


def simulate_channel(model: ChannelModel, rng: random.Random) -> tuple[float, bool]:
    """One send attempt: (latency_ms, delivered).  Failures still take time."""
    latency = model.mean_ms + rng.uniform(-model.jitter_ms, model.jitter_ms)
    delivered = rng.random() < model.success_probability
    return (latency, delivered)


def _percentile(sorted_values: list[float], fraction: float) -> float:
    if not sorted_values:
        return 0.0
    rank = max(1, int(-(-fraction * len(sorted_values) // 1)))  # ceil
    return sorted_values[min(rank, len(sorted_values)) - 1]


def summarize_samples(samples: list[float]) -> dict:
    ordered = sorted(samples)
    return {
        "count": len(ordered),
        "p50": round(_percentile(ordered, 0.50), 3),
        "p95": round(_percentile(ordered, 0.95), 3),
        "max": round(ordered[-1], 3) if ordered else 0.0,
    }


@dataclass(slots=True)
class RunMetrics:
    windows: int = 0
    readings_ingested: int = 0
    readings_rejected: int = 0
    alerts_by_level: dict = field(default_factory=lambda: {"YELLOW": 0, "ORANGE": 0, "RED": 0})
    manual_alerts: int = 0
    suppressed_alerts: int = 0
    undelivered_alerts: int = 0
    stage_samples: dict = field(default_factory=lambda: {s: [] for s in _STAGES})
    channel_stats: dict = field(default_factory=lambda: {
        c: {"sent": 0, "delivered": 0, "failed": 0} for c in ("sms", "push", "call")
    })
    volunteers_notified: int = 0
    volunteers_accepted: int = 0
    volunteers_declined: int = 0
    uplink: dict = field(default_factory=dict)
    digest: str = ""

    def to_dict(self) -> dict:
        notifications = {}
        total_sent = total_delivered = total_failed = 0
        for name in ("sms", "push", "call"):
            stats = self.channel_stats[name]
            sent = stats["sent"]
            total_sent += sent
            total_delivered += stats["delivered"]
            total_failed += stats["failed"]
            notifications[name] = {
                "sent": sent,
                "delivered": stats["delivered"],
                "failed": stats["failed"],
                "success_rate": round(stats["delivered"] / sent, 6) if sent else None,
            }
        notifications["overall"] = {
            "sent": total_sent,
            "delivered": total_delivered,
            "failed": total_failed,
            "success_rate": round(total_delivered / total_sent, 6) if total_sent else None,
        }
        return {
            "windows": self.windows,
            "readings_ingested": self.readings_ingested,
            "readings_rejected": self.readings_rejected,
            "alerts": {
                **self.alerts_by_level,
                "manual": self.manual_alerts,
                "suppressed": self.suppressed_alerts,
                "undelivered": self.undelivered_alerts,
            },
            "stage_latency_ms": {
                stage: summarize_samples(samples)
                for stage, samples in self.stage_samples.items()
            },
            "notifications": notifications,
            "volunteers": {
                "notified": self.volunteers_notified,
                "accepted": self.volunteers_accepted,
                "declined": self.volunteers_declined,
            },
            "uplink": self.uplink,
            "digest": self.digest,
        }


@dataclass(slots=True)
class RunResult:
    metrics: RunMetrics
    logs: dict[str, list[str]]
    wall_seconds: float
    alert_latencies: list[dict] = field(default_factory=list)


@dataclass(slots=True)
class _AlertTracker:
    alert: Alert
    dispatch_time: int
    outstanding: int
    best_channel_latency: float | None = None


LOG_ORDER = ("fusion", "alerts", "notifications", "uplink")


class _Simulation:
    def __init__(self, config: SimConfig, readings: list[SensorReading]) -> None:
        self.config = config
        self.rng = random.Random(config.seed)
        self.pipeline = ElderPipeline(config)
        self.hub = ChannelHub(is_open=True)
        self.notification_log = NotificationLog()
        self.cloud = CloudCollector()
        self.uplink = UplinkClient(
            config.gateway_id,
            capacity=config.uplink_capacity,
            transit_ms=config.uplink_transit_ms,
            on_sent=self.cloud.receive,
        )
        self.metrics = RunMetrics()
        self.alert_latencies: list[dict] = []
        self.fusion_log: list[str] = []
        self.alert_log: list[str] = []
        self.link_up = True
        self.trackers: dict[str, _AlertTracker] = {}
        self._heap: list[tuple[int, int, int, str, object]] = []
        self._seq = 0
        ble = int(config.stage_latencies.ble_ms)
        self._arrivals = sorted(
            ((r.timestamp + ble, r) for r in readings), key=lambda pair: pair[0]
        )
        self._arrival_idx = 0

    def _push(self, when: int, priority: int, kind: str, payload: object = None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (when, priority, self._seq, kind, payload))

    def _schedule_all(self) -> None:
        cfg = self.config
        ble = int(cfg.stage_latencies.ble_ms)
        if self._arrivals:
            max_t = self._arrivals[-1][1].timestamp
            last_tick = -(-max_t // cfg.hop_ms) * cfg.hop_ms
            for window_end in range(cfg.window_ms, last_tick + 1, cfg.hop_ms):
                self._push(window_end + ble, _PRIO_TICK, "tick", window_end)
            for beat in range(cfg.heartbeat_interval_ms, last_tick + 1, cfg.heartbeat_interval_ms):
                self._push(beat, _PRIO_HEARTBEAT, "heartbeat", None)
        for start, end in cfg.link_outages:
            self._push(start, _PRIO_LINK_DOWN, "link_down", None)
            self._push(end, _PRIO_LINK_UP, "link_up", None)
        for trigger_at in cfg.manual_triggers_ms:
            self._push(trigger_at, _PRIO_MANUAL, "manual", None)

    def _ingest_until(self, now: int) -> None:
        arrivals = self._arrivals
        idx = self._arrival_idx
        while idx < len(arrivals) and arrivals[idx][0] <= now:
            if self.pipeline.ingest(arrivals[idx][1]):
                self.metrics.readings_ingested += 1
            idx += 1
        self._arrival_idx = idx

    def run(self) -> None:
        self._schedule_all()
        handlers = {
            "tick": self._on_tick,
            "manual": self._on_manual,
            "delivery": self._on_delivery,
            "response": self._on_response,
            "link_down": self._on_link_down,
            "link_up": self._on_link_up,
            "heartbeat": self._on_heartbeat,
        }
        last_when = 0
        while self._heap:
            when, _prio, _seq, kind, payload = heapq.heappop(self._heap)
            if when < last_when:
                raise RuntimeError(f"event at {when} after clock reached {last_when}")
            last_when = when
            self._ingest_until(when)
            handlers[kind](when, payload)
        self.metrics.readings_rejected = self.pipeline.rejected_count
        self.metrics.suppressed_alerts = self.pipeline.alerts.suppressed_count
        self.metrics.undelivered_alerts = sum(
            1 for t in self.trackers.values() if t.best_channel_latency is None
        )
        self.metrics.uplink = {
            "published": self.uplink.envelope_count,
            "sent": self.uplink.sent_count,
            "still_buffered": len(self.uplink.buffer),
            "replayed": self.uplink.replayed_count,
            "dropped": self.uplink.dropped_count,
            "cloud_received": len(self.cloud.received),
            "sequence_gaps": self.cloud.gap_total,
        }

    # ------------------------------------------------------------------
    # Event handlers
    # ------------------------------------------------------------------

    def _on_tick(self, now: int, window_end: int) -> None:
        step = self.pipeline.advance(window_end)
        if step is None:
            return
        self.metrics.windows += 1
        record = step.fusion.to_record()
        self.fusion_log.append(json.dumps(record, separators=(",", ":")))
        self._publish("data", json.dumps(record, separators=(",", ":")), now)
        if step.alert is not None:
            self._start_alert(step.alert, step.plan, now, automatic_step=step)

    def _on_manual(self, now: int, _payload: object) -> None:
        alert, plan = self.pipeline.manual_trigger(now)
        self.metrics.manual_alerts += 1
        self._start_alert(alert, plan, now, automatic_step=None)

    def _start_alert(
        self,
        alert: Alert,
        plan: NotificationPlan | None,
        now: int,
        automatic_step: PipelineStep | None,
    ) -> None:
        cfg = self.config
        stages = cfg.stage_latencies
        if alert.source is AlertSource.AUTOMATIC:
            self.metrics.alerts_by_level[alert.level.name] += 1
            dispatch_time = now + int(stages.decision_ms())
        else:
            dispatch_time = now + int(stages.dispatch_ms)
        alert_record = {
            "t": alert.created_at,
            "alert_id": alert.alert_id,
            "elder_id": alert.elder_id,
            "level": alert.level.name,
            "source": alert.source.value,
            "location": alert.location,
            "detail": alert.risk_detail,
        }
        if automatic_step is not None:
            alert_record["base"] = round(automatic_step.assessment.base_score, 6)
            alert_record["adjusted"] = round(automatic_step.assessment.adjusted_score, 6)
            alert_record["trend"] = automatic_step.assessment.trend.value
        self.alert_log.append(json.dumps(alert_record, separators=(",", ":")))
        self._publish("alert", json.dumps(alert_record, separators=(",", ":")), now)

        if plan is None or not plan.entries:
            return
        records = dispatch(alert, plan, self.hub, dispatch_time)
        roles = {(e.recipient, e.channel): e.role for e in plan.entries}
        self.trackers[alert.alert_id] = _AlertTracker(
            alert=alert, dispatch_time=dispatch_time, outstanding=len(records)
        )
        for record in records:
            self.notification_log.add(record)
            self.metrics.channel_stats[record.channel.value]["sent"] += 1
            model = self.config.channels[record.channel.value]
            latency, delivered = simulate_channel(model, self.rng)
            role = roles[(record.recipient, record.channel)]
            self._push(
                dispatch_time + int(latency),
                _PRIO_DELIVERY,
                "delivery",
                (record.record_id, record.channel, latency, delivered, role, alert.alert_id),
            )

    def _on_delivery(self, now: int, payload: object) -> None:
        record_id, channel, latency, delivered, role, alert_id = payload
        if delivered:
            status = DeliveryStatus.ANSWERED if channel is Channel.CALL else DeliveryStatus.DELIVERED
        else:
            status = DeliveryStatus.FAILED
        self.notification_log.apply_receipt(record_id, status, now)
        stats = self.metrics.channel_stats[channel.value]
        if delivered:
            stats["delivered"] += 1
        else:
            stats["failed"] += 1
        tracker = self.trackers[alert_id]
        tracker.outstanding -= 1
        if delivered and (
            tracker.best_channel_latency is None or latency < tracker.best_channel_latency
        ):
            tracker.best_channel_latency = latency
        if tracker.outstanding == 0 and tracker.best_channel_latency is not None:
            self._finish_alert(tracker)
        if delivered and role is ContactRole.VOLUNTEER and channel is Channel.PUSH:
            self.metrics.volunteers_notified += 1
            delay = self.rng.uniform(VOLUNTEER_RESPONSE_MIN_MS, VOLUNTEER_RESPONSE_MAX_MS)
            self._push(now + int(delay), _PRIO_RESPONSE, "response", record_id)

    def _finish_alert(self, tracker: _AlertTracker) -> None:
        stages = self.config.stage_latencies
        channel_latency = tracker.best_channel_latency
        samples = self.metrics.stage_samples
        if tracker.alert.source is AlertSource.AUTOMATIC:
            parts = {
                "ble": stages.ble_ms,
                "fusion": stages.fusion_ms,
                "inference": stages.inference_ms,
                "risk": stages.risk_ms,
                "dispatch": stages.dispatch_ms,
                "channel": channel_latency,
            }
        else:
            parts = {"dispatch": stages.dispatch_ms, "channel": channel_latency}
        for stage, value in parts.items():
            samples[stage].append(value)
        total = sum(parts.values())
        samples["end_to_end"].append(total)
        self.alert_latencies.append(
            {
                "alert_id": tracker.alert.alert_id,
                "level": tracker.alert.level.name,
                "source": tracker.alert.source.value,
                "stages": parts,
                "end_to_end": total,
            }
        )

    def _on_response(self, now: int, record_id: str) -> None:
        if self.rng.random() < self.config.volunteer_accept_probability:
            self.metrics.volunteers_accepted += 1
            self.notification_log.apply_receipt(record_id, DeliveryStatus.READ, now)
        else:
            self.metrics.volunteers_declined += 1

    def _on_link_down(self, _now: int, _payload: object) -> None:
        self.link_up = False

    def _on_link_up(self, now: int, _payload: object) -> None:
        self.link_up = True
        self.uplink.replay_on_reconnect(now)

    def _on_heartbeat(self, now: int, _payload: object) -> None:
        envelope = self.uplink.heartbeat(now)
        self.uplink.publish(envelope, self.link_up, now)

    def _publish(self, suffix: str, payload: str, now: int) -> None:
        envelope = self.uplink.make_envelope(suffix, payload, now)
        self.uplink.publish(envelope, self.link_up, now)

    # ------------------------------------------------------------------

    def collect_logs(self) -> dict[str, list[str]]:
        return {
            "fusion": self.fusion_log,
            "alerts": self.alert_log,
            "notifications": self.notification_log.audit_lines(),
            "uplink": self.uplink.transcript_lines(),
        }


def compute_digest(logs: dict[str, list[str]]) -> str:
    digest = hashlib.sha256()
    for name in LOG_ORDER:
        digest.update(name.encode())
        for line in logs[name]:
            digest.update(line.encode())
            digest.update(b"\n")
    return digest.hexdigest()


def run(config: SimConfig, readings: list[SensorReading]) -> RunResult:
    """Replay a trace through the pipeline; observable output is seed-pure."""
    started = time.perf_counter()
    sim = _Simulation(config, readings)
    sim.run()
    logs = sim.collect_logs()
    sim.metrics.digest = compute_digest(logs)
    return RunResult(
        metrics=sim.metrics,
        logs=logs,
        wall_seconds=time.perf_counter() - started,
        alert_latencies=sim.alert_latencies,
    )


def write_outputs(result: RunResult, out_dir: str | Path) -> list[Path]:
    """Write logs, metrics.json, and report.txt; returns the paths written."""
    from .report import render_report

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in LOG_ORDER:
        path = out / f"{name}.log"
        content = "".join(line + "\n" for line in result.logs[name])
        path.write_text(content)
        written.append(path)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(result.metrics.to_dict(), indent=2) + "\n")
    written.append(metrics_path)
    report_path = out / "report.txt"
    report_path.write_text(render_report(result.metrics.to_dict()))
    written.append(report_path)
    return written
