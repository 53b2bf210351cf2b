"""Deterministic synthetic traces for the canonical monitoring situations.

Each generator draws from its own seeded RNG, so a (kind, duration, seed)
triple always yields the same readings.  Shapes:

* normal    - quiet daily movement, stable vitals, known location
* fall      - walking, an impact spike past 3 g, a sub-0.5 g free-fall
              tail, then motionless lying
* hypoxia   - resting vitals with SpO2 ramping 97 -> 86 and holding low
* wandering - rapid activity switching at unknown location with bursts of
              high intensity
* outage    - the normal trace; pair it with a link-down interval from
              scenario_overrides()

Magnitudes are tuned against the classifier thresholds: wandering keeps
acceleration above the 15 m/s^2 drop threshold so intensity, not free-fall,
drives the labels.
"""

from __future__ import annotations

import random

from .types import DoorEvent, ImuSample, SensorReading, SensorType, VitalsSample

SCENARIO_KINDS = ("normal", "fall", "hypoxia", "wandering", "outage")

GRAVITY = 9.81
IMU_PERIOD_MS = 100
HR_PERIOD_MS = 1000
SPO2_PERIOD_MS = 2000
MOTION_PERIOD_MS = 1000

WRISTBAND_ID = "wristband-1"
MOTION_ID = "motion-1"
DOOR_ID = "door-1"


def _wristband_imu(t: int, ax: float, ay: float, az: float) -> SensorReading:
    return SensorReading(t, WRISTBAND_ID, SensorType.WRISTBAND, ImuSample(ax, ay, az))


def _vitals(t: int, hr: float | None = None, spo2: float | None = None) -> SensorReading:
    return SensorReading(t, WRISTBAND_ID, SensorType.WRISTBAND, VitalsSample(hr, spo2))


def _quiet_imu(rng: random.Random, t: int, wobble: float = 0.05) -> SensorReading:
    return _wristband_imu(
        t,
        rng.gauss(0.0, wobble),
        rng.gauss(0.0, wobble),
        GRAVITY + rng.gauss(0.0, wobble),
    )


def _walking_imu(rng: random.Random, t: int, step: int, swing: float = 0.75) -> SensorReading:
    # Alternating magnitude around gravity: |delta| per sample ~= 2 * swing.
    offset = swing if step % 2 == 0 else -swing
    return _wristband_imu(t, rng.gauss(0.0, 0.02), rng.gauss(0.0, 0.02), GRAVITY + offset)


def _stable_vitals(rng: random.Random, duration_ms: int, hr_base: float = 72.0,
                   spo2_base: float = 97.5) -> list[SensorReading]:
    readings = []
    for t in range(0, duration_ms, HR_PERIOD_MS):
        readings.append(_vitals(t, hr=hr_base + rng.gauss(0.0, 1.2)))
    for t in range(0, duration_ms, SPO2_PERIOD_MS):
        readings.append(_vitals(t, spo2=spo2_base + rng.gauss(0.0, 0.2)))
    return readings


def _ambient(rng: random.Random, duration_ms: int) -> list[SensorReading]:
    """Fixed motion sensor pings (gravity plus vibration) and rare door events."""
    readings = []
    for t in range(0, duration_ms, MOTION_PERIOD_MS):
        readings.append(
            SensorReading(
                t, MOTION_ID, SensorType.MOTION,
                ImuSample(rng.gauss(0.0, 0.02), rng.gauss(0.0, 0.02),
                          GRAVITY + rng.gauss(0.0, 0.02)),
            )
        )
    for t in range(40 * 60_000, duration_ms - 4000, 40 * 60_000):
        readings.append(SensorReading(t, DOOR_ID, SensorType.DOOR, DoorEvent(opened=True)))
        readings.append(SensorReading(t + 4000, DOOR_ID, SensorType.DOOR, DoorEvent(opened=False)))
    return readings


def _normal(rng: random.Random, duration_ms: int) -> list[SensorReading]:
    readings = []
    step = 0
    for t in range(0, duration_ms, IMU_PERIOD_MS):
        # 20 s cadence: three quarters quiet, one quarter gentle walking.
        if (t // 1000) % 20 < 15:
            readings.append(_quiet_imu(rng, t))
        else:
            readings.append(_walking_imu(rng, t, step))
            step += 1
    readings.extend(_stable_vitals(rng, duration_ms))
    readings.extend(_ambient(rng, duration_ms))
    return readings


def _fall(rng: random.Random, duration_ms: int) -> list[SensorReading]:
    fall_at = max(10_000, duration_ms // 3)
    impact_end = fall_at + 400
    freefall_end = impact_end + 200
    readings = []
    step = 0
    for t in range(0, duration_ms, IMU_PERIOD_MS):
        if t < fall_at:
            readings.append(_walking_imu(rng, t, step))
            step += 1
        elif t < impact_end:
            # Impact: vertical magnitude swings past 4 g sample to sample,
            # keeping the mean vector upright so posture flips cleanly at
            # the window boundary.
            spike = 4.0 * GRAVITY if step % 2 == 0 else 0.5 * GRAVITY
            readings.append(_wristband_imu(t, rng.gauss(0.0, 0.05), 0.0, spike))
            step += 1
        elif t < freefall_end:
            readings.append(_wristband_imu(t, rng.gauss(0.0, 0.2), rng.gauss(0.0, 0.2),
                                           rng.gauss(1.5, 0.2)))
        else:
            # Lying: gravity along the body axis, barely any change.
            readings.append(
                _wristband_imu(t, GRAVITY + rng.gauss(0.0, 0.03),
                               rng.gauss(0.0, 0.03), rng.gauss(0.0, 0.03))
            )
    readings.extend(_stable_vitals(rng, duration_ms, hr_base=76.0))
    readings.extend(_ambient(rng, duration_ms))
    return readings


def _hypoxia(rng: random.Random, duration_ms: int) -> list[SensorReading]:
    ramp_start = max(20_000, duration_ms // 3)
    ramp_ms = 10_000
    readings = []
    for t in range(0, duration_ms, IMU_PERIOD_MS):
        readings.append(_quiet_imu(rng, t))
    for t in range(0, duration_ms, HR_PERIOD_MS):
        readings.append(_vitals(t, hr=74.0 + rng.gauss(0.0, 1.0)))
    for t in range(0, duration_ms, SPO2_PERIOD_MS):
        if t < ramp_start:
            spo2 = 97.0 + rng.gauss(0.0, 0.15)
        elif t < ramp_start + ramp_ms:
            spo2 = 97.0 - 11.0 * (t - ramp_start) / ramp_ms
        else:
            spo2 = 86.0 + rng.gauss(0.0, 0.15)
        readings.append(_vitals(t, spo2=spo2))
    readings.extend(_ambient(rng, duration_ms))
    return readings


# Per-second |delta magnitude| swings; three-second window means then cycle
# through running, stationary, sitting, and walking bands.  The 16.5 m/s^2
# base keeps alternating samples from forming a sustained sub-15 span, so
# intensity, not the drop rule, drives the labels.
_WANDER_CYCLE = (9.0, 0.0, 0.0, 0.0, 2.0, 4.0)


def _wandering(rng: random.Random, duration_ms: int) -> list[SensorReading]:
    base = 16.5
    readings = []
    step = 0
    for t in range(0, duration_ms, IMU_PERIOD_MS):
        swing = _WANDER_CYCLE[(t // 1000) % len(_WANDER_CYCLE)] / 2.0
        offset = swing if step % 2 == 0 else -swing
        readings.append(_wristband_imu(t, 0.0, 0.0, base + offset + rng.gauss(0.0, 0.01)))
        step += 1
    readings.extend(_stable_vitals(rng, duration_ms))
    # No ambient sensors: location stays unknown while motion runs high.
    return readings


_GENERATORS = {
    "normal": _normal,
    "fall": _fall,
    "hypoxia": _hypoxia,
    "wandering": _wandering,
    "outage": _normal,
}


def generate_scenario(kind: str, duration_s: int, seed: int) -> list[SensorReading]:
    """Deterministic synthetic trace for one scenario kind."""
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"unknown scenario {kind!r}; choose from {', '.join(SCENARIO_KINDS)}")
    if duration_s <= 0:
        raise ValueError("scenario duration must be positive")
    rng = random.Random(f"{kind}:{seed}")
    readings = _GENERATORS[kind](rng, duration_s * 1000)
    readings.sort(key=lambda r: (r.timestamp, r.sensor_id))
    return readings


def scenario_overrides(kind: str, duration_s: int) -> dict:
    """Config overrides that complete a scenario (only outage needs one)."""
    if kind == "outage":
        start = duration_s * 1000 // 3
        end = 2 * duration_s * 1000 // 3
        return {"link_outages": [(start, end)]}
    return {}


__all__ = ["SCENARIO_KINDS", "generate_scenario", "scenario_overrides"]
