"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class SimulateRequest(BaseModel):
    scenario: str | None = Field(default=None, description="Scenario kind to synthesize.")
    trace_text: str | None = Field(default=None, description="Inline trace; overrides scenario.")
    duration_s: int = Field(default=120, gt=0)
    seed: int = 7
    config: dict | None = Field(default=None, description="SimConfig overrides as a JSON tree.")


class SimulateResponse(BaseModel):
    metrics: dict
    digest: str
    report_text: str


class GenerateRequest(BaseModel):
    scenario: str
    duration_s: int = Field(default=120, gt=0)
    seed: int = 7


class GenerateResponse(BaseModel):
    trace_text: str
    reading_count: int
    config_overrides: dict


class ReportRequest(BaseModel):
    metrics: dict


class ReportResponse(BaseModel):
    report_text: str


class SessionCreateRequest(BaseModel):
    config: dict | None = None


class SessionCreateResponse(BaseModel):
    session_id: str


class ReadingIn(BaseModel):
    t_ms: int = Field(ge=0)
    sensor_id: str
    sensor_type: str
    payload: dict


class ReadingAck(BaseModel):
    accepted: bool
    rejected_total: int


class AdvanceRequest(BaseModel):
    now_ms: int = Field(ge=0)


class AlertOut(BaseModel):
    alert_id: str
    elder_id: str
    created_at: int
    level: str
    source: str
    location: str
    risk_detail: str
    plan: list[dict]


class AdvanceResponse(BaseModel):
    emitted: bool
    fusion: dict | None = None
    level: str | None = None
    base_score: float | None = None
    adjusted_score: float | None = None
    trend: str | None = None
    alert: AlertOut | None = None


class ManualTriggerRequest(BaseModel):
    now_ms: int = Field(ge=0)
