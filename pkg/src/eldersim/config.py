"""Simulation configuration: defaults, JSON loading, and validation.

Every tunable constant the pipeline scatters across fusion, inference, risk
scoring, escalation, and the uplink lives here, so a single JSON document
pins an entire reproducible run.  Validation happens at load time and raises
ConfigError naming the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .escalation import Contact, ContactRole, DEFAULT_DEDUP_WINDOW_MS, DEFAULT_VOLUNTEER_RADIUS_M
from .fusion import SensorWeightTable
from .inference import QuietHours
from .risk import AdjustmentConstants, AlertThresholds, RiskWeights
from .uplink import DEFAULT_TRANSIT_MS, OFFLINE_BUFFER_CAPACITY
from .windowing import DEFAULT_HOP_MS, DEFAULT_TOLERANCE_MS, DEFAULT_WINDOW_MS


@dataclass(slots=True)
class ChannelModel:
    """Latency and reliability of one notification channel."""

    mean_ms: float
    jitter_ms: float
    success_probability: float

    def __post_init__(self) -> None:
        if self.mean_ms <= 0.0:
            raise ConfigError(f"channel mean_ms must be positive, got {self.mean_ms}")
        if not 0.0 <= self.success_probability <= 1.0:
            raise ConfigError(
                f"channel success_probability must be in [0, 1], got {self.success_probability}"
            )
        if not 0.0 <= self.jitter_ms < self.mean_ms:
            raise ConfigError(
                f"channel jitter_ms must be in [0, mean), got {self.jitter_ms}"
            )


@dataclass(slots=True)
class StageLatencies:
    """Configured per-stage compute latencies (ms), machine-independent."""

    ble_ms: float = 30.0
    fusion_ms: float = 15.0
    inference_ms: float = 5.0
    risk_ms: float = 10.0
    dispatch_ms: float = 0.0

    def decision_ms(self) -> float:
        return self.fusion_ms + self.inference_ms + self.risk_ms + self.dispatch_ms


def _parse_clock(text: str, field_name: str) -> int:
    try:
        hours, minutes = text.split(":")
        minute_of_day = int(hours) * 60 + int(minutes)
    except (ValueError, AttributeError) as exc:
        raise ConfigError(f"{field_name}: expected HH:MM, got {text!r}") from exc
    if not 0 <= minute_of_day < 24 * 60:
        raise ConfigError(f"{field_name}: {text!r} is not a valid time of day")
    return minute_of_day


def default_contacts() -> list[Contact]:
    return [
        Contact("family-1", ContactRole.FAMILY, phone="555-0101", has_app=True),
        Contact("family-2", ContactRole.FAMILY, phone="555-0102", has_app=False),
        Contact("doctor-1", ContactRole.DOCTOR, phone="555-0201", has_app=True),
        Contact("volunteer-1", ContactRole.VOLUNTEER, phone="555-0301", has_app=True,
                x_m=120.0, y_m=80.0, available=True),
        Contact("volunteer-2", ContactRole.VOLUNTEER, phone="555-0302", has_app=True,
                x_m=-300.0, y_m=150.0, available=True),
    ]


def default_channels() -> dict[str, ChannelModel]:
    return {
        "sms": ChannelModel(mean_ms=1500.0, jitter_ms=300.0, success_probability=0.985),
        "push": ChannelModel(mean_ms=800.0, jitter_ms=200.0, success_probability=0.995),
        "call": ChannelModel(mean_ms=3000.0, jitter_ms=500.0, success_probability=0.95),
    }


@dataclass(slots=True)
class SimConfig:
    seed: int = 42
    elder_id: str = "elder-1"
    gateway_id: str = "gw-1"
    window_ms: int = DEFAULT_WINDOW_MS
    hop_ms: int = DEFAULT_HOP_MS
    tolerance_ms: int = DEFAULT_TOLERANCE_MS
    sensor_weights: SensorWeightTable = field(default_factory=SensorWeightTable)
    risk_weights: RiskWeights = field(default_factory=RiskWeights)
    alert_thresholds: AlertThresholds = field(default_factory=AlertThresholds)
    adjustments: AdjustmentConstants = field(default_factory=AdjustmentConstants)
    quiet_hours: QuietHours = field(default_factory=QuietHours)
    wall_clock_anchor_minute: int = 8 * 60
    volunteer_radius_m: float = DEFAULT_VOLUNTEER_RADIUS_M
    volunteer_accept_probability: float = 0.7
    channels: dict[str, ChannelModel] = field(default_factory=default_channels)
    stage_latencies: StageLatencies = field(default_factory=StageLatencies)
    uplink_capacity: int = OFFLINE_BUFFER_CAPACITY
    uplink_transit_ms: int = DEFAULT_TRANSIT_MS
    heartbeat_interval_ms: int = 30_000
    link_outages: list[tuple[int, int]] = field(default_factory=list)
    contacts: list[Contact] = field(default_factory=default_contacts)
    sensor_rooms: dict[str, str] = field(default_factory=lambda: {
        "motion-1": "living_room",
        "door-1": "entrance",
    })
    elder_position: tuple[float, float] = (0.0, 0.0)
    alert_dedup_ms: int = DEFAULT_DEDUP_WINDOW_MS
    manual_triggers_ms: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.window_ms <= 0 or self.hop_ms <= 0:
            raise ConfigError("window_ms and hop_ms must be positive")
        if self.tolerance_ms < 0:
            raise ConfigError("tolerance_ms cannot be negative")
        if not 0.0 <= self.volunteer_accept_probability <= 1.0:
            raise ConfigError("volunteer_accept_probability must be in [0, 1]")
        for name in ("sms", "push", "call"):
            if name not in self.channels:
                raise ConfigError(f"channels: missing model for {name!r}")
        for start, end in self.link_outages:
            if end <= start or start < 0:
                raise ConfigError(f"link_outages: bad interval ({start}, {end})")
        ids = [c.contact_id for c in self.contacts]
        if len(ids) != len(set(ids)):
            raise ConfigError("contacts: contact_id values must be unique")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        """Build a config from a parsed JSON tree, applying defaults."""
        try:
            return cls(**_coerce_fields(data))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a JSON object")
        return cls.from_dict(data)


def _coerce_fields(data: dict) -> dict:
    known = set(SimConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
    out = dict(data)
    if "sensor_weights" in out:
        out["sensor_weights"] = SensorWeightTable(**out["sensor_weights"])
    if "risk_weights" in out:
        out["risk_weights"] = RiskWeights(**out["risk_weights"])
    if "alert_thresholds" in out:
        out["alert_thresholds"] = AlertThresholds(**out["alert_thresholds"])
    if "adjustments" in out:
        out["adjustments"] = AdjustmentConstants(**out["adjustments"])
    if "quiet_hours" in out:
        quiet = out["quiet_hours"]
        out["quiet_hours"] = QuietHours(
            start_minute=_parse_clock(quiet["start"], "quiet_hours.start"),
            end_minute=_parse_clock(quiet["end"], "quiet_hours.end"),
        )
    if "wall_clock_anchor_minute" in out and isinstance(out["wall_clock_anchor_minute"], str):
        out["wall_clock_anchor_minute"] = _parse_clock(
            out["wall_clock_anchor_minute"], "wall_clock_anchor_minute"
        )
    if "channels" in out:
        out["channels"] = {
            name: ChannelModel(**model) for name, model in out["channels"].items()
        }
    if "stage_latencies" in out:
        out["stage_latencies"] = StageLatencies(**out["stage_latencies"])
    if "link_outages" in out:
        out["link_outages"] = [tuple(pair) for pair in out["link_outages"]]
    if "contacts" in out:
        contacts = []
        for item in out["contacts"]:
            entry = dict(item)
            entry["role"] = ContactRole(entry["role"])
            contacts.append(Contact(**entry))
        out["contacts"] = contacts
    if "elder_position" in out:
        out["elder_position"] = tuple(out["elder_position"])
    return out
