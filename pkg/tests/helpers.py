"""Factories for pipeline objects used across the test suite."""

from __future__ import annotations

from eldersim.fusion import FusionResult
from eldersim.inference import InferenceBundle
from eldersim.types import (
    Activity,
    ImuSample,
    Posture,
    PostureEstimate,
    SensorReading,
    SensorType,
    VitalsSample,
)


def imu_reading(
    t: int,
    ax: float = 0.0,
    ay: float = 0.0,
    az: float = 9.81,
    sensor_id: str = "wristband-1",
    sensor_type: SensorType = SensorType.WRISTBAND,
) -> SensorReading:
    return SensorReading(t, sensor_id, sensor_type, ImuSample(ax, ay, az))


def vitals_reading(
    t: int,
    hr: float | None = None,
    spo2: float | None = None,
    sensor_id: str = "wristband-1",
) -> SensorReading:
    return SensorReading(t, sensor_id, SensorType.WRISTBAND, VitalsSample(hr, spo2))


def camera_reading(
    t: int,
    posture: Posture = Posture.STANDING,
    confidence: float = 0.9,
    sensor_id: str = "camera-1",
) -> SensorReading:
    return SensorReading(
        t, sensor_id, SensorType.CAMERA, PostureEstimate(posture, confidence)
    )


def make_result(
    window_end: int = 1000,
    activity: Activity = Activity.STATIONARY,
    posture: Posture = Posture.STANDING,
    heart_rate: float | None = 72.0,
    spo2: float | None = 97.0,
    motion_intensity: float = 0.0,
    raw_intensity: float | None = None,
    location: str = "living_room",
    anomaly_score: float = 0.0,
    anomaly_flags: frozenset[str] = frozenset(),
    confidence: float = 0.6,
    gravity_angle_deg: float | None = 0.0,
) -> FusionResult:
    return FusionResult(
        window_end=window_end,
        activity=activity,
        posture=posture,
        heart_rate=heart_rate,
        spo2=spo2,
        motion_intensity=motion_intensity,
        raw_intensity=motion_intensity if raw_intensity is None else raw_intensity,
        location=location,
        anomaly_score=anomaly_score,
        anomaly_flags=anomaly_flags,
        confidence=confidence,
        gravity_angle_deg=gravity_angle_deg,
    )


def make_bundle(
    fall_probability: float = 0.0,
    fall_indicators: frozenset[str] = frozenset(),
    sequence_confirmed: bool = False,
    health_risk: float = 0.0,
    health_flags: frozenset[str] = frozenset(),
    behavior_flags: frozenset[str] = frozenset(),
) -> InferenceBundle:
    return InferenceBundle(
        fall_probability=fall_probability,
        fall_indicators=fall_indicators,
        sequence_confirmed=sequence_confirmed,
        health_risk=health_risk,
        health_flags=health_flags,
        behavior_flags=behavior_flags,
    )
