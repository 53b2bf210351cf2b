"""Weighted multi-sensor fusion of one window into a feature record.

The fusion stage turns a raw FusionWindow into a FusionResult:

* vitals are combined across contributing sensors by reliability-weighted
  averaging,
* motion intensity is the mean absolute change in acceleration magnitude,
  normalized by 5.0 and clipped to [0, 1] (the unclipped value is kept for
  the sensor-artifact check, which fires above 2.0),
* posture comes from the gravity direction over the trailing 500 ms of
  body-worn accelerometer data, with camera estimates cast as weighted votes,
* activity is a threshold ladder over intensity, overridden by a sustained
  acceleration drop (below 15 m/s^2 for at least 100 ms),
* a multi-factor anomaly score sums fixed contributions (heart rate 0.3,
  blood oxygen 0.4, motion 0.5), capped at 1.0 and flagged at 0.5,
* confidence grows with the number of contributing sensor types and
  saturates at 0.95.

Body posture and free-fall detection read wristband (body-worn) samples
only; fixed motion sensors cannot observe body orientation and contribute
to intensity fusion alone.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NoDataError
from .types import (
    Activity,
    ImuSample,
    Posture,
    PostureEstimate,
    SensorReading,
    SensorType,
    UNKNOWN_LOCATION,
    VitalsSample,
)
from .windowing import FusionWindow

GRAVITY_MS2 = 9.81
FREE_FALL_THRESHOLD_MS2 = 0.5 * GRAVITY_MS2
ACCEL_DROP_THRESHOLD_MS2 = 15.0
ACCEL_DROP_MIN_MS = 100
INTENSITY_DIVISOR = 5.0
POSTURE_WINDOW_MS = 500
STANDING_MAX_DEG = 30.0
SITTING_MAX_DEG = 60.0
ACCEL_VOTE_WEIGHT = 1.0

CONFIDENCE_FLOOR = 0.5
CONFIDENCE_STEP = 0.1
CONFIDENCE_CAP = 0.95

HR_LOW_BPM = 50.0
HR_HIGH_BPM = 120.0
HR_STDDEV_LIMIT = 20.0
HR_VARIABILITY_SAMPLES = 10
SPO2_LOW_PCT = 90.0
SPO2_DROP_PCT = 3.0
SPO2_TREND_SAMPLES = 5
MOTION_RAW_LIMIT = 2.0
STOP_PRIOR_MEAN = 0.4
STOP_CURRENT_MAX = 0.05
STOP_LOOKBACK = 3

HR_ANOMALY_CONTRIBUTION = 0.3
SPO2_ANOMALY_CONTRIBUTION = 0.4
MOTION_ANOMALY_CONTRIBUTION = 0.5
ANOMALY_FLAG_THRESHOLD = 0.5

# Deterministic tie-break for posture votes: more severe posture wins.
_POSTURE_SEVERITY = {
    Posture.FALLING: 4,
    Posture.LYING: 3,
    Posture.SITTING: 2,
    Posture.STANDING: 1,
    Posture.UNKNOWN: 0,
}


@dataclass(slots=True)
class SensorWeightTable:
    """Reliability weight per sensor type; door events carry no fusion weight."""

    wristband: float = 1.0
    camera: float = 0.9
    motion: float = 0.8
    bed: float = 0.6

    def __post_init__(self) -> None:
        for name in ("wristband", "camera", "motion", "bed"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"weight for {name} must be in (0, 1], got {value}")

    def weight_for(self, sensor_type: SensorType) -> float:
        if sensor_type is SensorType.WRISTBAND:
            return self.wristband
        if sensor_type is SensorType.CAMERA:
            return self.camera
        if sensor_type is SensorType.MOTION:
            return self.motion
        if sensor_type is SensorType.BED:
            return self.bed
        raise ValueError(f"{sensor_type.value} has no fusion weight")


@dataclass(slots=True)
class FusionResult:
    """Per-window fused features consumed by inference and risk scoring."""

    window_end: int
    activity: Activity
    posture: Posture
    heart_rate: float | None
    spo2: float | None
    motion_intensity: float
    raw_intensity: float
    location: str
    anomaly_score: float
    anomaly_flags: frozenset[str]
    confidence: float
    gravity_angle_deg: float | None = None

    def to_record(self) -> dict:
        """Stable-order summary for logs and the uplink (no raw samples)."""
        return {
            "t": self.window_end,
            "activity": self.activity.value,
            "posture": self.posture.value,
            "hr": None if self.heart_rate is None else round(self.heart_rate, 4),
            "spo2": None if self.spo2 is None else round(self.spo2, 4),
            "intensity": round(self.motion_intensity, 6),
            "raw_intensity": round(self.raw_intensity, 6),
            "location": self.location,
            "anomaly": round(self.anomaly_score, 6),
            "anomaly_flags": sorted(self.anomaly_flags),
            "confidence": round(self.confidence, 6),
        }


class VitalsTrail:
    """Short fused-vitals history feeding the per-window anomaly checks.

    Holds values from windows before the current one; the fusion call passes
    the current fused values alongside, so it never mutates the trail.
    """

    def __init__(self) -> None:
        self.heart_rate: deque[float] = deque(maxlen=HR_VARIABILITY_SAMPLES)
        self.spo2: deque[float] = deque(maxlen=SPO2_TREND_SAMPLES)
        self.intensity: deque[float] = deque(maxlen=STOP_LOOKBACK)

    def record(self, result: FusionResult) -> None:
        if result.heart_rate is not None:
            self.heart_rate.append(result.heart_rate)
        if result.spo2 is not None:
            self.spo2.append(result.spo2)
        self.intensity.append(result.motion_intensity)


@dataclass(slots=True)
class AnomalyResult:
    score: float
    flags: frozenset[str]

    @property
    def flagged(self) -> bool:
        return self.score >= ANOMALY_FLAG_THRESHOLD


def fuse_scalar(measurements: Sequence[tuple[float, float]]) -> float:
    """Reliability-weighted average of (value, weight) pairs."""
    if not measurements:
        raise NoDataError("cannot fuse an empty measurement list")
    total_weight = 0.0
    total = 0.0
    for value, weight in measurements:
        if weight <= 0.0:
            raise ValueError(f"fusion weight must be positive, got {weight}")
        total += value * weight
        total_weight += weight
    return total / total_weight


def compute_confidence(n_sources: int) -> float:
    """Confidence from the number of contributing sensor types, capped at 0.95."""
    if n_sources < 0:
        raise ValueError("source count cannot be negative")
    return min(CONFIDENCE_CAP, CONFIDENCE_FLOOR + n_sources * CONFIDENCE_STEP)


def magnitude(vector: tuple[float, float, float]) -> float:
    return math.sqrt(vector[0] * vector[0] + vector[1] * vector[1] + vector[2] * vector[2])


def motion_intensity(accel_series: Sequence[tuple[float, float, float]]) -> tuple[float, float]:
    """(clipped, raw) normalized mean absolute change in acceleration magnitude."""
    if len(accel_series) < 2:
        return (0.0, 0.0)
    previous = magnitude(accel_series[0])
    total = 0.0
    for vector in accel_series[1:]:
        current = magnitude(vector)
        total += abs(current - previous)
        previous = current
    raw = total / (len(accel_series) - 1) / INTENSITY_DIVISOR
    return (min(1.0, raw), raw)


def detect_accel_drop(samples: Sequence[tuple[int, tuple[float, float, float]]]) -> bool:
    """True when acceleration magnitude stays below 15 m/s^2 for >= 100 ms.

    ``samples`` are (timestamp_ms, accel_vector) pairs in time order; the run
    must be contiguous in the sample sequence.
    """
    run_start: int | None = None
    for timestamp, vector in samples:
        if magnitude(vector) < ACCEL_DROP_THRESHOLD_MS2:
            if run_start is None:
                run_start = timestamp
            elif timestamp - run_start >= ACCEL_DROP_MIN_MS:
                return True
        else:
            run_start = None
    return False


def tilt_angle_deg(accel_vectors: Sequence[tuple[float, float, float]]) -> float | None:
    """Angle between the mean acceleration vector and vertical, in degrees.

    Snapped to nanodegree precision so vectors constructed exactly on a
    band boundary classify on the boundary, not an ulp beside it.
    """
    if not accel_vectors:
        return None
    n = len(accel_vectors)
    mx = sum(v[0] for v in accel_vectors) / n
    my = sum(v[1] for v in accel_vectors) / n
    mz = sum(v[2] for v in accel_vectors) / n
    norm = math.sqrt(mx * mx + my * my + mz * mz)
    if norm == 0.0:
        return None
    cosine = max(-1.0, min(1.0, mz / norm))
    return round(math.degrees(math.acos(cosine)), 9)


def _posture_from_angle(angle_deg: float) -> Posture:
    if angle_deg < STANDING_MAX_DEG:
        return Posture.STANDING
    if angle_deg <= SITTING_MAX_DEG:
        return Posture.SITTING
    return Posture.LYING


def estimate_posture(
    accel_vectors: Sequence[tuple[float, float, float]],
    camera_votes: Iterable[tuple[Posture, float]] = (),
) -> Posture:
    """Gravity-angle posture with camera estimates as competing weighted votes.

    A mean acceleration magnitude under 0.5 g means free-fall and returns
    falling outright.  Otherwise the accelerometer casts a vote at weight 1.0
    for its angle-band posture and the highest total weight wins; ties break
    toward the more severe posture.
    """
    votes: dict[Posture, float] = {}
    if accel_vectors:
        mean_mag = sum(magnitude(v) for v in accel_vectors) / len(accel_vectors)
        if mean_mag < FREE_FALL_THRESHOLD_MS2:
            return Posture.FALLING
        angle = tilt_angle_deg(accel_vectors)
        if angle is not None:
            votes[_posture_from_angle(angle)] = ACCEL_VOTE_WEIGHT
    for posture, weight in camera_votes:
        votes[posture] = votes.get(posture, 0.0) + weight
    if not votes:
        return Posture.UNKNOWN
    return max(votes, key=lambda p: (votes[p], _POSTURE_SEVERITY[p]))


def classify_activity(intensity: float, drop: bool, posture: Posture) -> Activity:
    """Decision ladder over motion intensity; an acceleration drop wins outright."""
    if drop:
        return Activity.FALLING
    if posture is Posture.LYING and intensity < 0.1:
        return Activity.LYING
    if intensity < 0.1:
        return Activity.STATIONARY
    if intensity < 0.3:
        return Activity.SITTING
    if intensity < 0.5:
        return Activity.WALKING
    return Activity.RUNNING


def _pstdev(values: Sequence[float]) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def detect_anomalies(
    hr_history: Sequence[float],
    spo2_history: Sequence[float],
    raw_intensity: float,
    prev_intensities: Sequence[float],
) -> AnomalyResult:
    """Multi-factor anomaly score; absent vitals contribute nothing.

    hr_history / spo2_history are the most recent fused values, newest last,
    current window included.  prev_intensities are the clipped intensities of
    the three windows before the current one.
    """
    score = 0.0
    flags = set()
    if hr_history:
        latest_hr = hr_history[-1]
        hr_abnormal = latest_hr < HR_LOW_BPM or latest_hr > HR_HIGH_BPM
        if not hr_abnormal and len(hr_history) >= HR_VARIABILITY_SAMPLES:
            hr_abnormal = _pstdev(hr_history[-HR_VARIABILITY_SAMPLES:]) > HR_STDDEV_LIMIT
        if hr_abnormal:
            score += HR_ANOMALY_CONTRIBUTION
            flags.add("heart_rate")
    if spo2_history:
        latest_spo2 = spo2_history[-1]
        spo2_abnormal = latest_spo2 < SPO2_LOW_PCT
        if not spo2_abnormal and len(spo2_history) >= SPO2_TREND_SAMPLES:
            window = spo2_history[-SPO2_TREND_SAMPLES:]
            spo2_abnormal = (window[0] - window[-1]) > SPO2_DROP_PCT
        if spo2_abnormal:
            score += SPO2_ANOMALY_CONTRIBUTION
            flags.add("spo2")
    clipped = min(1.0, raw_intensity)
    motion_abnormal = raw_intensity > MOTION_RAW_LIMIT
    if not motion_abnormal and len(prev_intensities) >= STOP_LOOKBACK:
        recent = prev_intensities[-STOP_LOOKBACK:]
        prior_mean = sum(recent) / len(recent)
        motion_abnormal = prior_mean > STOP_PRIOR_MEAN and clipped < STOP_CURRENT_MAX
    if motion_abnormal:
        score += MOTION_ANOMALY_CONTRIBUTION
        flags.add("motion")
    return AnomalyResult(score=min(1.0, score), flags=frozenset(flags))


def _imu_streams(window: FusionWindow) -> dict[tuple[SensorType, str], list[SensorReading]]:
    """IMU readings grouped per physical sensor, preserving time order."""
    streams: dict[tuple[SensorType, str], list[SensorReading]] = {}
    for sensor_type in (SensorType.WRISTBAND, SensorType.MOTION):
        for reading in window.readings(sensor_type):
            if isinstance(reading.payload, ImuSample):
                streams.setdefault((sensor_type, reading.sensor_id), []).append(reading)
    return streams


def _fused_intensity(
    streams: dict[tuple[SensorType, str], list[SensorReading]],
    weights: SensorWeightTable,
) -> tuple[float, float]:
    """Per-sensor intensities combined by reliability weight.

    Body-worn streams carry the signal; fixed motion sensors only stand in
    when no wristband contributed, so a quiet wall sensor cannot dilute a
    real movement burst.
    """
    for group in ((SensorType.WRISTBAND,), (SensorType.MOTION,)):
        contributions: list[tuple[float, float]] = []
        for (sensor_type, _sensor_id), readings in sorted(streams.items()):
            if sensor_type not in group or len(readings) < 2:
                continue
            _, raw = motion_intensity([r.payload.accel() for r in readings])
            contributions.append((raw, weights.weight_for(sensor_type)))
        if contributions:
            raw = fuse_scalar(contributions)
            return (min(1.0, raw), raw)
    return (0.0, 0.0)


def _camera_vote(window: FusionWindow, weights: SensorWeightTable) -> list[tuple[Posture, float]]:
    """Reduce the window's camera estimates to one modal vote at camera weight."""
    tally: dict[Posture, float] = {}
    for reading in window.readings(SensorType.CAMERA):
        estimate = reading.payload
        if isinstance(estimate, PostureEstimate):
            tally[estimate.posture] = tally.get(estimate.posture, 0.0) + estimate.confidence
    if not tally:
        return []
    modal = max(tally, key=lambda p: (tally[p], _POSTURE_SEVERITY[p]))
    return [(modal, weights.camera)]


def _locate(window: FusionWindow, sensor_rooms: dict[str, str]) -> str:
    """Room of the most recent motion or door reading, else unknown."""
    newest: SensorReading | None = None
    for sensor_type in (SensorType.MOTION, SensorType.DOOR):
        readings = window.readings(sensor_type)
        if readings:
            candidate = readings[-1]
            if newest is None or candidate.timestamp >= newest.timestamp:
                newest = candidate
    if newest is None:
        return UNKNOWN_LOCATION
    return sensor_rooms.get(newest.sensor_id, UNKNOWN_LOCATION)


def fuse_window(
    window: FusionWindow,
    weights: SensorWeightTable | None = None,
    vitals_trail: VitalsTrail | None = None,
    sensor_rooms: dict[str, str] | None = None,
) -> FusionResult:
    """Fuse one window into a FusionResult; pure with respect to the trail."""
    weights = weights or SensorWeightTable()
    trail = vitals_trail or VitalsTrail()
    rooms = sensor_rooms or {}

    hr_pairs: list[tuple[float, float]] = []
    spo2_pairs: list[tuple[float, float]] = []
    for reading in window.readings(SensorType.WRISTBAND):
        payload = reading.payload
        if isinstance(payload, VitalsSample):
            weight = weights.weight_for(SensorType.WRISTBAND)
            if payload.heart_rate is not None:
                hr_pairs.append((payload.heart_rate, weight))
            if payload.spo2 is not None:
                spo2_pairs.append((payload.spo2, weight))
    heart_rate = fuse_scalar(hr_pairs) if hr_pairs else None
    spo2 = fuse_scalar(spo2_pairs) if spo2_pairs else None

    streams = _imu_streams(window)
    clipped, raw = _fused_intensity(streams, weights)

    # Body-worn samples only: orientation and free-fall are wrist properties.
    body_samples = [
        (r.timestamp, r.payload.accel())
        for r in window.readings(SensorType.WRISTBAND)
        if isinstance(r.payload, ImuSample)
    ]
    drop = detect_accel_drop(body_samples)
    posture_cut = window.window_end - POSTURE_WINDOW_MS
    trailing = [vec for t, vec in body_samples if t >= posture_cut]
    camera_votes = _camera_vote(window, weights)
    posture = estimate_posture(trailing, camera_votes)
    angle = None
    if trailing and posture is not Posture.FALLING:
        angle = tilt_angle_deg(trailing)

    activity = classify_activity(clipped, drop, posture)

    hr_history = list(trail.heart_rate)
    if heart_rate is not None:
        hr_history.append(heart_rate)
    spo2_history = list(trail.spo2)
    if spo2 is not None:
        spo2_history.append(spo2)
    anomaly = detect_anomalies(
        hr_history[-HR_VARIABILITY_SAMPLES:],
        spo2_history[-SPO2_TREND_SAMPLES:],
        raw,
        list(trail.intensity),
    )

    n_sources = sum(1 for readings in window.readings_by_type.values() if readings)
    return FusionResult(
        window_end=window.window_end,
        activity=activity,
        posture=posture,
        heart_rate=heart_rate,
        spo2=spo2,
        motion_intensity=clipped,
        raw_intensity=raw,
        location=_locate(window, rooms),
        anomaly_score=anomaly.score,
        anomaly_flags=anomaly.flags,
        confidence=compute_confidence(n_sources),
        gravity_angle_deg=angle,
    )
