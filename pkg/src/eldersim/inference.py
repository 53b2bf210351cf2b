"""Rule-based inference over the fused-feature history.

Three independent assessors run over a sliding history of the most recent
100 fusion results:

* fall detection scores five weighted indicators and halves the result
  unless a fall sequence (impact-then-stillness, or a standing/sitting to
  lying transition at elevated score) confirms it,
* health prediction grades heart-rate and blood-oxygen abnormality ladders
  and combines them 3:7 / 4:7,
* behavior analysis flags prolonged inactivity (outside quiet hours),
  activity agitation, and an unknown location under high motion.

All assessors are pure functions of the history snapshot and clock.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import OrderingError
from .fusion import (
    FusionResult,
    HR_HIGH_BPM,
    HR_LOW_BPM,
    HR_STDDEV_LIMIT,
    HR_VARIABILITY_SAMPLES,
    SPO2_DROP_PCT,
    SPO2_LOW_PCT,
    SPO2_TREND_SAMPLES,
)
from .types import Activity, Posture, UNKNOWN_LOCATION

HISTORY_CAPACITY = 100

FALL_INDICATOR_WEIGHTS = {
    "falling_activity": 0.9,
    "fallen_posture": 0.7,
    "post_fall_stillness": 0.8,
    "orientation_change": 0.6,
    "high_intensity": 0.5,
}
FALL_WEIGHT_TOTAL = 3.5
UNCONFIRMED_FACTOR = 0.5
SEQUENCE_LOOKBACK = 5
SEQUENCE_IMPACT_INTENSITY = 0.5
SEQUENCE_STILL_INTENSITY = 0.1
SEQUENCE_SCORE_FLOOR = 0.5
FALLEN_POSTURE_HORIZON_MS = 10_000
STILLNESS_MIN_WINDOWS = 2
ORIENTATION_DELTA_DEG = 45.0
ORIENTATION_LOOKBACK = 10
HIGH_INTENSITY_FLOOR = 0.8

HR_BREACH_SCORE = 1.0
HR_VARIABILITY_SCORE = 0.5
HR_TREND_SCORE = 0.3
HR_TREND_DELTA_BPM = 20.0
HR_TREND_SAMPLES = 5
SPO2_BREACH_SCORE = 1.0
SPO2_TREND_SCORE = 0.5
HEALTH_HR_WEIGHT = 3.0
HEALTH_SPO2_WEIGHT = 4.0

INACTIVITY_WINDOW = 10
INACTIVITY_MIN_STATIONARY = 8
AGITATION_WINDOW = 6
AGITATION_MIN_UNIQUE = 4
LOCATION_INTENSITY_FLOOR = 0.5

_LYING_LIKE = (Posture.LYING, Posture.FALLING)
_UPRIGHT = (Posture.STANDING, Posture.SITTING)


@dataclass(slots=True)
class QuietHours:
    """Nightly interval (minutes since midnight) that may wrap past midnight."""

    start_minute: int = 22 * 60
    end_minute: int = 7 * 60

    def contains(self, minute_of_day: float) -> bool:
        minute = minute_of_day % (24 * 60)
        if self.start_minute <= self.end_minute:
            return self.start_minute <= minute < self.end_minute
        return minute >= self.start_minute or minute < self.end_minute


class FusionHistory:
    """Ring buffer of the most recent 100 fusion results, newest last."""

    def __init__(self, capacity: int = HISTORY_CAPACITY) -> None:
        self._entries: deque[FusionResult] = deque(maxlen=capacity)

    def push(self, result: FusionResult) -> None:
        if self._entries and result.window_end <= self._entries[-1].window_end:
            raise OrderingError(
                f"fusion result at {result.window_end} not newer than "
                f"{self._entries[-1].window_end}"
            )
        self._entries.append(result)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[FusionResult]:
        return iter(self._entries)

    def last(self, n: int) -> list[FusionResult]:
        if n >= len(self._entries):
            return list(self._entries)
        return list(self._entries)[-n:]

    @property
    def latest(self) -> FusionResult | None:
        return self._entries[-1] if self._entries else None


@dataclass(slots=True)
class FallAssessment:
    probability: float
    indicators: frozenset[str]
    sequence_confirmed: bool


@dataclass(slots=True)
class HealthAssessment:
    risk: float
    flags: frozenset[str]


@dataclass(slots=True)
class InferenceBundle:
    """Combined output of the three inference tasks for one window."""

    fall_probability: float
    fall_indicators: frozenset[str]
    sequence_confirmed: bool
    health_risk: float
    health_flags: frozenset[str]
    behavior_flags: frozenset[str]


def _still_run_after_fall(entries: Sequence[FusionResult], horizon: int) -> bool:
    """Two-plus consecutive still windows somewhere after an in-horizon fall."""
    run = 0
    seen_fall = False
    for result in entries:
        if seen_fall:
            if result.motion_intensity < SEQUENCE_STILL_INTENSITY:
                run += 1
                if run >= STILLNESS_MIN_WINDOWS:
                    return True
            else:
                run = 0
        if result.activity is Activity.FALLING and result.window_end >= horizon:
            seen_fall = True
    return False


def _fall_indicators(entries: Sequence[FusionResult]) -> set[str]:
    latest = entries[-1]
    active: set[str] = set()
    if latest.activity is Activity.FALLING:
        active.add("falling_activity")

    horizon = latest.window_end - FALLEN_POSTURE_HORIZON_MS
    fall_nearby = any(
        r.activity is Activity.FALLING and r.window_end >= horizon for r in entries
    )
    if fall_nearby and latest.posture in _LYING_LIKE:
        active.add("fallen_posture")

    if _still_run_after_fall(entries, horizon):
        active.add("post_fall_stillness")

    # Same fall-context horizon as fallen_posture: ten windows.
    recent = entries[-ORIENTATION_LOOKBACK:]
    for previous, current in zip(recent, recent[1:]):
        if (
            previous.posture is not current.posture
            and previous.gravity_angle_deg is not None
            and current.gravity_angle_deg is not None
            and abs(current.gravity_angle_deg - previous.gravity_angle_deg)
            > ORIENTATION_DELTA_DEG
        ):
            active.add("orientation_change")
            break

    if latest.motion_intensity >= HIGH_INTENSITY_FLOOR:
        active.add("high_intensity")
    return active


def _sequence_confirmed(entries: Sequence[FusionResult], raw_score: float) -> bool:
    recent = entries[-SEQUENCE_LOOKBACK:]
    latest = entries[-1]
    impact_then_still = (
        any(r.motion_intensity >= SEQUENCE_IMPACT_INTENSITY for r in recent)
        and latest.motion_intensity < SEQUENCE_STILL_INTENSITY
    )
    if impact_then_still:
        return True
    if raw_score >= SEQUENCE_SCORE_FLOOR:
        for previous, current in zip(recent, recent[1:]):
            if previous.posture in _UPRIGHT and current.posture is Posture.LYING:
                return True
    return False


def assess_fall(history: FusionHistory) -> FallAssessment:
    """Weighted five-indicator fall score, halved without sequence confirmation."""
    entries = list(history)
    if not entries:
        raise ValueError("fall assessment requires a non-empty history")
    active = _fall_indicators(entries)
    raw = sum(FALL_INDICATOR_WEIGHTS[name] for name in sorted(active)) / FALL_WEIGHT_TOTAL
    confirmed = _sequence_confirmed(entries, raw)
    probability = raw if confirmed else raw * UNCONFIRMED_FACTOR
    return FallAssessment(
        probability=probability,
        indicators=frozenset(active),
        sequence_confirmed=confirmed,
    )


def _pstdev(values: Sequence[float]) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def assess_health(history: FusionHistory) -> HealthAssessment:
    """Severity ladders over fused vitals, combined 3:7 (HR) and 4:7 (SpO2)."""
    hr_series = [r.heart_rate for r in history if r.heart_rate is not None]
    spo2_series = [r.spo2 for r in history if r.spo2 is not None]

    hr_sub = 0.0
    if hr_series:
        latest = hr_series[-1]
        if latest < HR_LOW_BPM or latest > HR_HIGH_BPM:
            hr_sub = HR_BREACH_SCORE
        elif (
            len(hr_series) >= HR_VARIABILITY_SAMPLES
            and _pstdev(hr_series[-HR_VARIABILITY_SAMPLES:]) > HR_STDDEV_LIMIT
        ):
            hr_sub = HR_VARIABILITY_SCORE
        elif (
            len(hr_series) >= HR_TREND_SAMPLES
            and abs(hr_series[-1] - hr_series[-HR_TREND_SAMPLES]) > HR_TREND_DELTA_BPM
        ):
            hr_sub = HR_TREND_SCORE

    spo2_sub = 0.0
    if spo2_series:
        latest = spo2_series[-1]
        if latest < SPO2_LOW_PCT:
            spo2_sub = SPO2_BREACH_SCORE
        elif (
            len(spo2_series) >= SPO2_TREND_SAMPLES
            and (spo2_series[-SPO2_TREND_SAMPLES] - spo2_series[-1]) > SPO2_DROP_PCT
        ):
            spo2_sub = SPO2_TREND_SCORE

    risk = (HEALTH_HR_WEIGHT * hr_sub + HEALTH_SPO2_WEIGHT * spo2_sub) / (
        HEALTH_HR_WEIGHT + HEALTH_SPO2_WEIGHT
    )
    flags = set()
    if hr_sub > 0.0:
        flags.add("hr")
    if spo2_sub > 0.0:
        flags.add("spo2")
    return HealthAssessment(risk=risk, flags=frozenset(flags))


def assess_behavior(
    history: FusionHistory,
    minute_of_day: float,
    quiet_hours: QuietHours | None = None,
) -> frozenset[str]:
    """Behavior flags from the last ten windows only."""
    quiet = quiet_hours or QuietHours()
    flags: set[str] = set()
    latest = history.latest
    if latest is None:
        return frozenset()

    last_ten = history.last(INACTIVITY_WINDOW)
    if len(last_ten) >= INACTIVITY_WINDOW and not quiet.contains(minute_of_day):
        stationary = sum(1 for r in last_ten if r.activity is Activity.STATIONARY)
        if stationary >= INACTIVITY_MIN_STATIONARY:
            flags.add("prolonged_inactivity")

    last_six = history.last(AGITATION_WINDOW)
    if len({r.activity for r in last_six}) >= AGITATION_MIN_UNIQUE:
        flags.add("agitation")

    if latest.location == UNKNOWN_LOCATION and latest.motion_intensity > LOCATION_INTENSITY_FLOOR:
        flags.add("location_anomaly")
    return frozenset(flags)


def infer(
    result: FusionResult,
    history: FusionHistory,
    minute_of_day: float,
    quiet_hours: QuietHours | None = None,
) -> InferenceBundle:
    """Run the three assessors; ``result`` must already be pushed to history."""
    if history.latest is not result:
        raise ValueError("result must be pushed to the history before inference")
    fall = assess_fall(history)
    health = assess_health(history)
    behavior = assess_behavior(history, minute_of_day, quiet_hours)
    return InferenceBundle(
        fall_probability=fall.probability,
        fall_indicators=fall.indicators,
        sequence_confirmed=fall.sequence_confirmed,
        health_risk=health.risk,
        health_flags=health.flags,
        behavior_flags=behavior,
    )
