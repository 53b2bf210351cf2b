"""One elder's end-to-end processing pipeline, independent of transport.

The pipeline owns the single-writer state for one monitored person: the
window manager, vitals trail, fusion history, risk history, and alert
deduplication.  Each advance() produces the full decision for one window;
the caller (simulator or service) decides how to dispatch, time, and log it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SimConfig
from .errors import RejectedReadingError
from .escalation import Alert, AlertManager, NotificationPlan, plan_notifications
from .fusion import FusionResult, VitalsTrail, fuse_window
from .inference import FusionHistory, InferenceBundle, infer
from .risk import RiskAssessment, RiskAssessor
from .types import AlertLevel, SensorReading, UNKNOWN_LOCATION
from .windowing import WindowManager

MINUTES_PER_DAY = 24 * 60


@dataclass(slots=True)
class PipelineStep:
    """Everything the pipeline decided for one fusion window."""

    window_end: int
    fusion: FusionResult
    bundle: InferenceBundle
    assessment: RiskAssessment
    alert: Alert | None
    plan: NotificationPlan | None


class ElderPipeline:
    def __init__(self, config: SimConfig | None = None) -> None:
        self.config = config or SimConfig()
        cfg = self.config
        self.windows = WindowManager(
            window_ms=cfg.window_ms,
            hop_ms=cfg.hop_ms,
            tolerance_ms=cfg.tolerance_ms,
        )
        self.vitals_trail = VitalsTrail()
        self.history = FusionHistory()
        self.assessor = RiskAssessor(
            weights=cfg.risk_weights,
            thresholds=cfg.alert_thresholds,
            constants=cfg.adjustments,
        )
        self.alerts = AlertManager(cfg.elder_id, dedup_window_ms=cfg.alert_dedup_ms)
        self.last_location = UNKNOWN_LOCATION

    def ingest(self, reading: SensorReading) -> bool:
        """Buffer one reading; malformed input is counted, never fatal."""
        try:
            self.windows.ingest(reading)
        except RejectedReadingError:
            return False
        return True

    @property
    def rejected_count(self) -> int:
        return self.windows.rejected_count

    def minute_of_day(self, now_ms: int) -> float:
        return (self.config.wall_clock_anchor_minute + now_ms / 60_000.0) % MINUTES_PER_DAY

    def advance(self, now_ms: int) -> PipelineStep | None:
        """Process the window ending at now_ms; None inside the current hop."""
        window = self.windows.advance(now_ms)
        if window is None:
            return None
        fusion = fuse_window(
            window,
            weights=self.config.sensor_weights,
            vitals_trail=self.vitals_trail,
            sensor_rooms=self.config.sensor_rooms,
        )
        self.vitals_trail.record(fusion)
        self.history.push(fusion)
        if fusion.location != UNKNOWN_LOCATION:
            self.last_location = fusion.location
        bundle = infer(fusion, self.history, self.minute_of_day(now_ms), self.config.quiet_hours)
        assessment = self.assessor.assess(bundle, fusion, self.history)

        alert = None
        plan = None
        if assessment.level is not AlertLevel.NONE:
            alert = self.alerts.automatic(
                level=assessment.level,
                risk_detail=assessment.detail.to_text(),
                location=fusion.location,
                now=now_ms,
            )
            if alert is not None:
                plan = plan_notifications(
                    alert,
                    self.config.contacts,
                    volunteer_radius_m=self.config.volunteer_radius_m,
                    elder_position=self.config.elder_position,
                )
        return PipelineStep(
            window_end=now_ms,
            fusion=fusion,
            bundle=bundle,
            assessment=assessment,
            alert=alert,
            plan=plan,
        )

    def manual_trigger(self, now_ms: int) -> tuple[Alert, NotificationPlan]:
        """Panic-button path: RED alert and full three-level plan, no dedup."""
        alert = self.alerts.manual_trigger(now_ms, location=self.last_location)
        plan = plan_notifications(
            alert,
            self.config.contacts,
            volunteer_radius_m=self.config.volunteer_radius_m,
            elder_position=self.config.elder_position,
        )
        return alert, plan
