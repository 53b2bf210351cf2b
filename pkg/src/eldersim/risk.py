"""Four-dimensional risk scoring, alert levels, and the risk detail report.

The base score is a weighted sum of fall probability, health risk, a
behavior indicator, and the sensor anomaly score (defaults 0.4 / 0.4 /
0.15 / 0.05).  Additive adjustments then sharpen high-risk situations and a
trend term rewards or penalizes the direction of the last five scores.  The
clipped result maps onto NONE / YELLOW / ORANGE / RED through configurable
thresholds (lower bound inclusive; 0.8 or higher is RED), and prolonged
lying after a fall raises the level one extra step.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .fusion import ANOMALY_FLAG_THRESHOLD, FusionResult, HR_HIGH_BPM, HR_LOW_BPM, SPO2_LOW_PCT
from .inference import (
    FusionHistory,
    InferenceBundle,
    SEQUENCE_IMPACT_INTENSITY,
    SEQUENCE_STILL_INTENSITY,
)
from .types import Activity, AlertLevel, Posture, Trend

RISK_HISTORY_LENGTH = 5
POST_FALL_WINDOW_MS = 120_000
POST_FALL_LYING_MS = 60_000


@dataclass(slots=True)
class RiskWeights:
    """Dimension weights of the overall score; defaults sum to 1.0."""

    fall: float = 0.4
    health: float = 0.4
    behavior: float = 0.15
    anomaly: float = 0.05

    def __post_init__(self) -> None:
        for name in ("fall", "health", "behavior", "anomaly"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"risk weight {name} cannot be negative")


@dataclass(slots=True)
class AlertThresholds:
    yellow: float = 0.3
    orange: float = 0.6
    red: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 < self.yellow < self.orange < self.red <= 1.0:
            raise ValueError(
                f"thresholds must satisfy 0 < yellow < orange < red <= 1, "
                f"got {self.yellow}/{self.orange}/{self.red}"
            )


@dataclass(slots=True)
class AdjustmentConstants:
    """Additive score adjustments applied on top of the base score."""

    fall_probability_floor: float = 0.7
    fall_bonus: float = 0.2
    hr_bonus: float = 0.15
    spo2_bonus: float = 0.2
    behavior_bonus: float = 0.1
    anomaly_factor: float = 0.1
    trend_bonus: float = 0.2
    trend_delta: float = 0.2


def base_score(
    bundle: InferenceBundle,
    fusion: FusionResult,
    weights: RiskWeights | None = None,
) -> float:
    """Weighted sum of the four risk dimensions."""
    w = weights or RiskWeights()
    behavior_indicator = 1.0 if bundle.behavior_flags else 0.0
    return (
        w.fall * bundle.fall_probability
        + w.health * bundle.health_risk
        + w.behavior * behavior_indicator
        + w.anomaly * fusion.anomaly_score
    )


def apply_adjustments(
    base: float,
    bundle: InferenceBundle,
    fusion: FusionResult,
    trend: Trend,
    constants: AdjustmentConstants | None = None,
) -> float:
    """Additive danger-sign and trend adjustments, clipped to [0, 1]."""
    c = constants or AdjustmentConstants()
    score = base
    if bundle.fall_probability > c.fall_probability_floor:
        score += c.fall_bonus
    if "hr" in bundle.health_flags:
        score += c.hr_bonus
    if "spo2" in bundle.health_flags:
        score += c.spo2_bonus
    if bundle.behavior_flags:
        score += c.behavior_bonus
    if fusion.anomaly_score >= ANOMALY_FLAG_THRESHOLD:
        score += fusion.anomaly_score * c.anomaly_factor
    if trend is Trend.RISING:
        score += c.trend_bonus
    elif trend is Trend.FALLING:
        score -= c.trend_bonus
    return max(0.0, min(1.0, score))


def classify_trend(scores: Sequence[float], delta: float = 0.2) -> Trend:
    """Newest-minus-oldest difference over the five-score window."""
    if len(scores) < RISK_HISTORY_LENGTH:
        return Trend.STABLE
    window = scores[-RISK_HISTORY_LENGTH:]
    change = window[-1] - window[0]
    if change > delta:
        return Trend.RISING
    if change < -delta:
        return Trend.FALLING
    return Trend.STABLE


def determine_level(score: float, thresholds: AlertThresholds | None = None) -> AlertLevel:
    """Half-open level bands with inclusive lower bounds."""
    t = thresholds or AlertThresholds()
    if score < t.yellow:
        return AlertLevel.NONE
    if score < t.orange:
        return AlertLevel.YELLOW
    if score < t.red:
        return AlertLevel.ORANGE
    return AlertLevel.RED


def _last_impact(history: FusionHistory) -> FusionResult | None:
    """Most recent fall-impact window: falling activity at high intensity.

    Intensity distinguishes a real impact from the quiet windows the literal
    15 m/s^2 drop rule also labels as falling activity.
    """
    impact = None
    for result in history:
        if (
            result.activity is Activity.FALLING
            and result.motion_intensity >= SEQUENCE_IMPACT_INTENSITY
        ):
            impact = result
    return impact


def post_fall_escalation(history: FusionHistory, level: AlertLevel) -> AlertLevel:
    """Raise the level one step when lying persists >= 60 s after a recent fall."""
    latest = history.latest
    if latest is None or level is AlertLevel.RED:
        return level
    impact = _last_impact(history)
    if impact is None:
        return level
    since_impact = latest.window_end - impact.window_end
    if not POST_FALL_LYING_MS <= since_impact <= POST_FALL_WINDOW_MS:
        return level
    if latest.posture is not Posture.LYING:
        return level
    for result in history:
        if result.window_end > impact.window_end and result.posture not in (
            Posture.LYING,
            Posture.FALLING,
        ):
            return level
    return AlertLevel(min(int(level) + 1, int(AlertLevel.RED)))


@dataclass(slots=True)
class RiskDetail:
    """Per-dimension contributing factors with deterministic ordering."""

    sections: dict[str, dict[str, object]] = field(default_factory=dict)

    def to_text(self) -> str:
        if not self.sections:
            return "no contributing factors"
        return json.dumps(self.sections, separators=(",", ":"))


def _stillness_seconds(history: FusionHistory) -> float:
    entries = list(history)
    if not entries:
        return 0.0
    latest_end = entries[-1].window_end
    boundary = latest_end
    for result in reversed(entries):
        if result.motion_intensity < SEQUENCE_STILL_INTENSITY:
            boundary = result.window_end
        else:
            break
    return (latest_end - boundary) / 1000.0


def _posture_transition(history: FusionHistory) -> tuple[str, str]:
    """Posture just before the most recent impact, and the current posture."""
    entries = list(history)
    before = Posture.UNKNOWN
    impact = _last_impact(history)
    if impact is not None:
        for result in entries:
            if result.window_end >= impact.window_end:
                break
            if result.posture not in (Posture.LYING, Posture.FALLING, Posture.UNKNOWN):
                before = result.posture
    return (before.value, entries[-1].posture.value if entries else Posture.UNKNOWN.value)


def generate_risk_detail(
    bundle: InferenceBundle,
    fusion: FusionResult,
    history: FusionHistory,
    trend: Trend,
) -> RiskDetail:
    """Report only the factors above their triggers, in fixed section order."""
    sections: dict[str, dict[str, object]] = {}

    if bundle.fall_indicators:
        posture_before, posture_after = _posture_transition(history)
        sections["fall"] = {
            "probability": round(bundle.fall_probability, 4),
            "impact_detected": "high_intensity" in bundle.fall_indicators
            or bundle.sequence_confirmed,
            "posture_before": posture_before,
            "posture_after": posture_after,
            "stillness_s": round(_stillness_seconds(history), 1),
            "indicators": sorted(bundle.fall_indicators),
        }

    if bundle.health_flags:
        health: dict[str, object] = {"flags": sorted(bundle.health_flags)}
        if "hr" in bundle.health_flags and fusion.heart_rate is not None:
            hr = fusion.heart_rate
            health["hr"] = round(hr, 1)
            if hr > HR_HIGH_BPM:
                health["hr_deviation"] = round(hr - HR_HIGH_BPM, 1)
                health["hr_limit"] = HR_HIGH_BPM
            elif hr < HR_LOW_BPM:
                health["hr_deviation"] = round(HR_LOW_BPM - hr, 1)
                health["hr_limit"] = HR_LOW_BPM
        if "spo2" in bundle.health_flags and fusion.spo2 is not None:
            spo2 = fusion.spo2
            health["spo2"] = round(spo2, 1)
            if spo2 < SPO2_LOW_PCT:
                health["spo2_deviation"] = round(SPO2_LOW_PCT - spo2, 1)
                health["spo2_limit"] = SPO2_LOW_PCT
        health["trend"] = trend.value
        sections["health"] = health

    if bundle.behavior_flags:
        sections["behavior"] = {
            "patterns": sorted(bundle.behavior_flags),
            "window_s": round(
                (history.latest.window_end - list(history)[0].window_end) / 1000.0, 1
            )
            if len(history) > 1
            else 0.0,
        }

    if fusion.anomaly_flags:
        sections["sensor"] = {
            "flags": sorted(fusion.anomaly_flags),
            "score": round(fusion.anomaly_score, 4),
        }

    return RiskDetail(sections=sections)


@dataclass(slots=True)
class RiskAssessment:
    base_score: float
    adjusted_score: float
    trend: Trend
    level: AlertLevel
    detail: RiskDetail

    def to_record(self) -> dict:
        return {
            "base": round(self.base_score, 6),
            "adjusted": round(self.adjusted_score, 6),
            "trend": self.trend.value,
            "level": self.level.name,
            "detail": self.detail.to_text(),
        }


class RiskAssessor:
    """Owns the five-score risk history and composes the scoring pipeline."""

    def __init__(
        self,
        weights: RiskWeights | None = None,
        thresholds: AlertThresholds | None = None,
        constants: AdjustmentConstants | None = None,
    ) -> None:
        self.weights = weights or RiskWeights()
        self.thresholds = thresholds or AlertThresholds()
        self.constants = constants or AdjustmentConstants()
        self.history: deque[float] = deque(maxlen=RISK_HISTORY_LENGTH)

    def assess(
        self,
        bundle: InferenceBundle,
        fusion: FusionResult,
        fusion_history: FusionHistory,
    ) -> RiskAssessment:
        """Score, adjust, level, escalate, and report; appends to the history.

        The trend is classified from the scores prior to this assessment and
        then feeds the current adjustment.
        """
        trend = classify_trend(list(self.history), self.constants.trend_delta)
        base = base_score(bundle, fusion, self.weights)
        adjusted = apply_adjustments(base, bundle, fusion, trend, self.constants)
        level = determine_level(adjusted, self.thresholds)
        level = post_fall_escalation(fusion_history, level)
        detail = generate_risk_detail(bundle, fusion, fusion_history, trend)
        self.history.append(adjusted)
        return RiskAssessment(
            base_score=base,
            adjusted_score=adjusted,
            trend=trend,
            level=level,
            detail=detail,
        )
