"""HTTP service wrapping the pipeline and simulator for multiple clients.

Batch endpoints (/simulate, /scenarios, /reports) run the deterministic
simulator in-process and return everything in the response body.  Session
endpoints keep one live pipeline per monitored person so interactive
clients can stream readings, advance windows, and fire the manual trigger.
"""

from __future__ import annotations

import itertools
import threading

from fastapi import FastAPI, HTTPException

from ..config import SimConfig
from ..errors import ConfigError, ElderSimError
from ..escalation import Alert, NotificationPlan
from ..pipeline import ElderPipeline
from ..report import render_report
from ..scenarios import SCENARIO_KINDS, generate_scenario, scenario_overrides
from ..simulator import run as run_simulation
from ..traces import format_trace, parse_trace_text
from ..types import (
    BedPresence,
    DoorEvent,
    ImuSample,
    Posture,
    PostureEstimate,
    SensorReading,
    SensorType,
    VitalsSample,
)
from .schemas import (
    AdvanceRequest,
    AdvanceResponse,
    AlertOut,
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    ManualTriggerRequest,
    ReadingAck,
    ReadingIn,
    ReportRequest,
    ReportResponse,
    SessionCreateRequest,
    SessionCreateResponse,
    SimulateRequest,
    SimulateResponse,
)


class SessionStore:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, ElderPipeline] = {}
        self._alerts: dict[str, list[AlertOut]] = {}
        self._ids = itertools.count(1)

    def create(self, config: SimConfig) -> str:
        with self._lock:
            session_id = f"session-{next(self._ids)}"
            self._sessions[session_id] = ElderPipeline(config)
            self._alerts[session_id] = []
            return session_id

    def get(self, session_id: str) -> ElderPipeline:
        with self._lock:
            pipeline = self._sessions.get(session_id)
        if pipeline is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return pipeline

    def remember_alert(self, session_id: str, alert: AlertOut) -> None:
        with self._lock:
            self._alerts[session_id].append(alert)

    def alerts(self, session_id: str) -> list[AlertOut]:
        with self._lock:
            if session_id not in self._alerts:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
            return list(self._alerts[session_id])


def _payload_from_dict(payload: dict):
    """Build the payload the keys describe; the pipeline validates the
    sensor-type match and counts mismatches as drops."""
    try:
        if "ax" in payload:
            return ImuSample(**payload)
        if "posture" in payload:
            return PostureEstimate(
                posture=Posture(payload["posture"]), confidence=payload["conf"]
            )
        if "opened" in payload:
            return DoorEvent(opened=bool(payload["opened"]))
        if "present" in payload:
            return BedPresence(present=bool(payload["present"]))
        if "hr" in payload or "spo2" in payload:
            return VitalsSample(heart_rate=payload.get("hr"), spo2=payload.get("spo2"))
    except (KeyError, TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=f"bad payload: {exc}") from exc
    raise HTTPException(status_code=422, detail="unrecognized payload keys")


def _alert_out(alert: Alert, plan: NotificationPlan) -> AlertOut:
    return AlertOut(
        alert_id=alert.alert_id,
        elder_id=alert.elder_id,
        created_at=alert.created_at,
        level=alert.level.name,
        source=alert.source.value,
        location=alert.location,
        risk_detail=alert.risk_detail,
        plan=[
            {"recipient": e.recipient, "channel": e.channel.value, "role": e.role.value}
            for e in plan.entries
        ],
    )


def _config_from(overrides: dict | None, seed: int | None = None) -> SimConfig:
    try:
        config = SimConfig.from_dict(overrides) if overrides else SimConfig()
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    if seed is not None:
        config.seed = seed
    return config


def create_app() -> FastAPI:
    app = FastAPI(title="eldersim", description="Elderly-care monitoring simulator")
    sessions = SessionStore()

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse()

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(request: SimulateRequest) -> SimulateResponse:
        if request.trace_text is None and request.scenario is None:
            raise HTTPException(status_code=422, detail="provide scenario or trace_text")
        overrides = dict(request.config or {})
        if request.trace_text is not None:
            try:
                readings = parse_trace_text(request.trace_text).readings
            except ElderSimError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        else:
            if request.scenario not in SCENARIO_KINDS:
                raise HTTPException(
                    status_code=422, detail=f"unknown scenario {request.scenario!r}"
                )
            readings = generate_scenario(request.scenario, request.duration_s, request.seed)
            for key, value in scenario_overrides(request.scenario, request.duration_s).items():
                overrides.setdefault(key, value)
        config = _config_from(overrides, seed=request.seed)
        result = run_simulation(config, readings)
        metrics = result.metrics.to_dict()
        return SimulateResponse(
            metrics=metrics,
            digest=result.metrics.digest,
            report_text=render_report(metrics),
        )

    @app.post("/scenarios", response_model=GenerateResponse)
    def scenarios(request: GenerateRequest) -> GenerateResponse:
        if request.scenario not in SCENARIO_KINDS:
            raise HTTPException(status_code=422, detail=f"unknown scenario {request.scenario!r}")
        readings = generate_scenario(request.scenario, request.duration_s, request.seed)
        return GenerateResponse(
            trace_text=format_trace(readings),
            reading_count=len(readings),
            config_overrides=scenario_overrides(request.scenario, request.duration_s),
        )

    @app.post("/reports", response_model=ReportResponse)
    def reports(request: ReportRequest) -> ReportResponse:
        try:
            return ReportResponse(report_text=render_report(request.metrics))
        except KeyError as exc:
            raise HTTPException(status_code=422, detail=f"metrics missing key {exc}") from exc

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(request: SessionCreateRequest) -> SessionCreateResponse:
        config = _config_from(request.config)
        return SessionCreateResponse(session_id=sessions.create(config))

    @app.post("/sessions/{session_id}/readings", response_model=ReadingAck)
    def post_reading(session_id: str, reading: ReadingIn) -> ReadingAck:
        pipeline = sessions.get(session_id)
        try:
            sensor_type = SensorType(reading.sensor_type)
        except ValueError as exc:
            raise HTTPException(
                status_code=422, detail=f"unknown sensor_type {reading.sensor_type!r}"
            ) from exc
        payload = _payload_from_dict(reading.payload)
        accepted = pipeline.ingest(
            SensorReading(
                timestamp=reading.t_ms,
                sensor_id=reading.sensor_id,
                sensor_type=sensor_type,
                payload=payload,
            )
        )
        return ReadingAck(accepted=accepted, rejected_total=pipeline.rejected_count)

    @app.post("/sessions/{session_id}/advance", response_model=AdvanceResponse)
    def advance(session_id: str, request: AdvanceRequest) -> AdvanceResponse:
        pipeline = sessions.get(session_id)
        try:
            step = pipeline.advance(request.now_ms)
        except ElderSimError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        if step is None:
            return AdvanceResponse(emitted=False)
        alert_out = None
        if step.alert is not None and step.plan is not None:
            alert_out = _alert_out(step.alert, step.plan)
            sessions.remember_alert(session_id, alert_out)
        return AdvanceResponse(
            emitted=True,
            fusion=step.fusion.to_record(),
            level=step.assessment.level.name,
            base_score=round(step.assessment.base_score, 6),
            adjusted_score=round(step.assessment.adjusted_score, 6),
            trend=step.assessment.trend.value,
            alert=alert_out,
        )

    @app.post("/sessions/{session_id}/manual-trigger", response_model=AlertOut)
    def manual_trigger(session_id: str, request: ManualTriggerRequest) -> AlertOut:
        pipeline = sessions.get(session_id)
        alert, plan = pipeline.manual_trigger(request.now_ms)
        alert_out = _alert_out(alert, plan)
        sessions.remember_alert(session_id, alert_out)
        return alert_out

    @app.get("/sessions/{session_id}/alerts", response_model=list[AlertOut])
    def list_alerts(session_id: str) -> list[AlertOut]:
        return sessions.alerts(session_id)

    return app


app = create_app()
