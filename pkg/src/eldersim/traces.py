"""Sensor trace files: one reading per line, comma-separated.

Format: ``t_ms,sensor_id,sensor_type,key=value;key=value;...``
Header and comment lines start with ``#``.  Payload keys by sensor type:
imu ax,ay,az,gx,gy,gz; vitals hr,spo2; camera posture,conf; door opened(0/1);
bed present(0/1).

Structural problems raise TraceParseError naming the line; a line with an
unknown sensor type is counted and skipped so one bad device cannot sink a
replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import TraceParseError
from .types import (
    BedPresence,
    DoorEvent,
    ImuSample,
    Posture,
    PostureEstimate,
    SensorReading,
    SensorType,
    VitalsSample,
)

TRACE_HEADER = "# t_ms,sensor_id,sensor_type,key=value;..."

_IMU_KEYS = ("ax", "ay", "az", "gx", "gy", "gz")


@dataclass(slots=True)
class TraceLoadResult:
    readings: list[SensorReading] = field(default_factory=list)
    rejected_lines: int = 0


def _parse_pairs(text: str, line_no: int) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise TraceParseError(f"line {line_no}: payload item {chunk!r} is not key=value")
        key, value = chunk.split("=", 1)
        pairs[key.strip()] = value.strip()
    if not pairs:
        raise TraceParseError(f"line {line_no}: empty payload")
    return pairs


def _float_of(pairs: dict[str, str], key: str, line_no: int) -> float:
    try:
        return float(pairs[key])
    except KeyError as exc:
        raise TraceParseError(f"line {line_no}: missing payload key {key!r}") from exc
    except ValueError as exc:
        raise TraceParseError(f"line {line_no}: {key}={pairs[key]!r} is not a number") from exc


def _flag_of(pairs: dict[str, str], key: str, line_no: int) -> bool:
    value = pairs.get(key)
    if value not in ("0", "1"):
        raise TraceParseError(f"line {line_no}: {key} must be 0 or 1, got {value!r}")
    return value == "1"


def _parse_payload(sensor_type: SensorType, pairs: dict[str, str], line_no: int):
    if sensor_type in (SensorType.WRISTBAND, SensorType.MOTION):
        if "ax" in pairs or sensor_type is SensorType.MOTION:
            missing = [k for k in _IMU_KEYS if k not in pairs]
            if missing:
                raise TraceParseError(
                    f"line {line_no}: imu payload missing {', '.join(missing)}"
                )
            return ImuSample(*(_float_of(pairs, k, line_no) for k in _IMU_KEYS))
        vitals = VitalsSample(
            heart_rate=_float_of(pairs, "hr", line_no) if "hr" in pairs else None,
            spo2=_float_of(pairs, "spo2", line_no) if "spo2" in pairs else None,
        )
        if vitals.heart_rate is None and vitals.spo2 is None:
            raise TraceParseError(f"line {line_no}: vitals payload carries neither hr nor spo2")
        return vitals
    if sensor_type is SensorType.CAMERA:
        posture_text = pairs.get("posture", "")
        try:
            posture = Posture(posture_text)
        except ValueError as exc:
            raise TraceParseError(
                f"line {line_no}: unknown posture {posture_text!r}"
            ) from exc
        return PostureEstimate(posture=posture, confidence=_float_of(pairs, "conf", line_no))
    if sensor_type is SensorType.DOOR:
        return DoorEvent(opened=_flag_of(pairs, "opened", line_no))
    return BedPresence(present=_flag_of(pairs, "present", line_no))


def parse_trace_text(text: str) -> TraceLoadResult:
    result = TraceLoadResult()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        columns = line.split(",")
        if len(columns) != 4:
            raise TraceParseError(
                f"line {line_no}: expected 4 comma-separated columns, got {len(columns)}"
            )
        t_text, sensor_id, type_text, payload_text = (c.strip() for c in columns)
        try:
            timestamp = int(t_text)
        except ValueError as exc:
            raise TraceParseError(f"line {line_no}: bad timestamp {t_text!r}") from exc
        if timestamp < 0:
            raise TraceParseError(f"line {line_no}: negative timestamp {timestamp}")
        try:
            sensor_type = SensorType(type_text)
        except ValueError:
            result.rejected_lines += 1
            continue
        pairs = _parse_pairs(payload_text, line_no)
        payload = _parse_payload(sensor_type, pairs, line_no)
        result.readings.append(
            SensorReading(
                timestamp=timestamp,
                sensor_id=sensor_id,
                sensor_type=sensor_type,
                payload=payload,
            )
        )
    result.readings.sort(key=lambda r: r.timestamp)
    return result


def load_trace(path: str | Path) -> TraceLoadResult:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TraceParseError(f"cannot read trace {path}: {exc}") from exc
    return parse_trace_text(text)


def _payload_text(reading: SensorReading) -> str:
    payload = reading.payload
    if isinstance(payload, ImuSample):
        return ";".join(f"{k}={getattr(payload, k):.4f}" for k in _IMU_KEYS)
    if isinstance(payload, VitalsSample):
        parts = []
        if payload.heart_rate is not None:
            parts.append(f"hr={payload.heart_rate:.2f}")
        if payload.spo2 is not None:
            parts.append(f"spo2={payload.spo2:.2f}")
        return ";".join(parts)
    if isinstance(payload, PostureEstimate):
        return f"posture={payload.posture.value};conf={payload.confidence:.2f}"
    if isinstance(payload, DoorEvent):
        return f"opened={int(payload.opened)}"
    return f"present={int(payload.present)}"


def format_trace(readings: list[SensorReading]) -> str:
    lines = [TRACE_HEADER]
    for reading in readings:
        lines.append(
            f"{reading.timestamp},{reading.sensor_id},"
            f"{reading.sensor_type.value},{_payload_text(reading)}"
        )
    return "\n".join(lines) + "\n"


def write_trace(readings: list[SensorReading], path: str | Path) -> None:
    Path(path).write_text(format_trace(readings))
