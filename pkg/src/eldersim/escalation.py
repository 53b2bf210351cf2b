"""Graduated three-level notification planning, dispatch, and status tracking.

YELLOW alerts notify family (sms, plus push where the app is installed).
ORANGE adds community doctors over the same channels.  RED adds automated
phone calls to doctors and pushes to at most two nearby available
volunteers, chosen purely by proximity.  Every dispatched entry produces one
notification record whose status only ever moves forward, and every status
change lands in an append-only audit log.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass, field
from enum import Enum

from .errors import TransitionError
from .risk import RiskDetail
from .types import AlertLevel

DEFAULT_VOLUNTEER_RADIUS_M = 1000.0
MAX_VOLUNTEERS_PER_ALERT = 2
DEFAULT_DEDUP_WINDOW_MS = 60_000


class ContactRole(str, Enum):
    FAMILY = "family"
    DOCTOR = "doctor"
    VOLUNTEER = "volunteer"


class Channel(str, Enum):
    SMS = "sms"
    PUSH = "push"
    CALL = "call"


class DeliveryStatus(str, Enum):
    PENDING = "pending"
    DELIVERED = "delivered"
    READ = "read"
    FAILED = "failed"
    RINGING = "ringing"
    ANSWERED = "answered"
    VOICEMAIL = "voicemail"


# Forward-only lifecycle per channel family.
_LEGAL_TRANSITIONS: dict[DeliveryStatus, frozenset[DeliveryStatus]] = {
    DeliveryStatus.PENDING: frozenset({DeliveryStatus.DELIVERED, DeliveryStatus.FAILED}),
    DeliveryStatus.DELIVERED: frozenset({DeliveryStatus.READ}),
    DeliveryStatus.READ: frozenset(),
    DeliveryStatus.FAILED: frozenset(),
    DeliveryStatus.RINGING: frozenset(
        {DeliveryStatus.ANSWERED, DeliveryStatus.VOICEMAIL, DeliveryStatus.FAILED}
    ),
    DeliveryStatus.ANSWERED: frozenset(),
    DeliveryStatus.VOICEMAIL: frozenset(),
}


class AlertSource(str, Enum):
    AUTOMATIC = "automatic"
    MANUAL = "manual"


@dataclass(slots=True)
class Contact:
    contact_id: str
    role: ContactRole
    phone: str = ""
    has_app: bool = False
    x_m: float | None = None
    y_m: float | None = None
    available: bool = True

    def __post_init__(self) -> None:
        if self.role is ContactRole.VOLUNTEER and (self.x_m is None or self.y_m is None):
            raise ValueError(f"volunteer {self.contact_id} needs a planar location")


@dataclass(slots=True)
class Alert:
    alert_id: str
    elder_id: str
    created_at: int
    level: AlertLevel
    source: AlertSource
    risk_detail: str
    location: str

    def __post_init__(self) -> None:
        if self.level is AlertLevel.NONE:
            raise ValueError("an alert cannot carry level NONE")
        if self.source is AlertSource.MANUAL and self.level is not AlertLevel.RED:
            raise ValueError("manual alerts are always RED")


@dataclass(slots=True)
class PlanEntry:
    recipient: str
    channel: Channel
    role: ContactRole


@dataclass(slots=True)
class NotificationPlan:
    entries: list[PlanEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def recipients(self) -> set[str]:
        return {entry.recipient for entry in self.entries}


def select_volunteers(
    elder_position: tuple[float, float],
    volunteers: list[Contact],
    radius_m: float = DEFAULT_VOLUNTEER_RADIUS_M,
) -> list[Contact]:
    """Available volunteers within the radius, nearest first, at most two."""
    if radius_m <= 0.0:
        raise ValueError("volunteer radius must be positive")
    ranked: list[tuple[float, str, Contact]] = []
    for contact in volunteers:
        if contact.role is not ContactRole.VOLUNTEER or not contact.available:
            continue
        distance = math.hypot(contact.x_m - elder_position[0], contact.y_m - elder_position[1])
        if distance <= radius_m:
            ranked.append((distance, contact.contact_id, contact))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return [contact for _, _, contact in ranked[:MAX_VOLUNTEERS_PER_ALERT]]


def plan_notifications(
    alert: Alert,
    directory: list[Contact],
    volunteer_radius_m: float = DEFAULT_VOLUNTEER_RADIUS_M,
    elder_position: tuple[float, float] = (0.0, 0.0),
) -> NotificationPlan:
    """Build the graduated dispatch plan for one alert.

    Entries have no ordering dependency; they list family first, then
    doctors, then doctor calls, then volunteers, purely for log stability.
    """
    plan = NotificationPlan()
    families = [c for c in directory if c.role is ContactRole.FAMILY]
    doctors = [c for c in directory if c.role is ContactRole.DOCTOR]
    volunteers = [c for c in directory if c.role is ContactRole.VOLUNTEER]

    for contact in families:
        plan.entries.append(PlanEntry(contact.contact_id, Channel.SMS, ContactRole.FAMILY))
        if contact.has_app:
            plan.entries.append(PlanEntry(contact.contact_id, Channel.PUSH, ContactRole.FAMILY))

    if alert.level >= AlertLevel.ORANGE:
        for contact in doctors:
            plan.entries.append(PlanEntry(contact.contact_id, Channel.SMS, ContactRole.DOCTOR))
            if contact.has_app:
                plan.entries.append(
                    PlanEntry(contact.contact_id, Channel.PUSH, ContactRole.DOCTOR)
                )

    if alert.level is AlertLevel.RED:
        for contact in doctors:
            plan.entries.append(PlanEntry(contact.contact_id, Channel.CALL, ContactRole.DOCTOR))
        for contact in select_volunteers(elder_position, volunteers, volunteer_radius_m):
            plan.entries.append(
                PlanEntry(contact.contact_id, Channel.PUSH, ContactRole.VOLUNTEER)
            )

    if not plan.entries:
        plan.warnings.append(f"no reachable contacts for alert {alert.alert_id}")
    return plan


@dataclass(slots=True)
class NotificationRecord:
    record_id: str
    alert_id: str
    recipient: str
    channel: Channel
    content_digest: str
    sent_at: int
    status: DeliveryStatus
    status_updated_at: int


@dataclass(slots=True)
class ChannelHub:
    """Stand-in for the provider connections; closed means dispatch fails."""

    is_open: bool = True


def _content_digest(alert: Alert) -> str:
    body = f"{alert.level.name}|{alert.location}|{alert.risk_detail}"
    return hashlib.sha256(body.encode()).hexdigest()[:12]


def dispatch(
    alert: Alert,
    plan: NotificationPlan,
    hub: ChannelHub,
    now: int,
) -> list[NotificationRecord]:
    """One record per plan entry, pending (sms/push) or ringing (call)."""
    records = []
    digest = _content_digest(alert)
    for entry in plan.entries:
        if not hub.is_open:
            status = DeliveryStatus.FAILED
        elif entry.channel is Channel.CALL:
            status = DeliveryStatus.RINGING
        else:
            status = DeliveryStatus.PENDING
        records.append(
            NotificationRecord(
                record_id=f"{alert.alert_id}:{entry.recipient}:{entry.channel.value}",
                alert_id=alert.alert_id,
                recipient=entry.recipient,
                channel=entry.channel,
                content_digest=digest,
                sent_at=now,
                status=status,
                status_updated_at=now,
            )
        )
    return records


def update_status(
    record: NotificationRecord,
    new_status: DeliveryStatus,
    at: int,
) -> NotificationRecord:
    """Apply a delivery receipt; illegal transitions leave the record untouched."""
    if new_status not in _LEGAL_TRANSITIONS[record.status]:
        raise TransitionError(
            f"{record.record_id}: {record.status.value} -> {new_status.value} is not allowed"
        )
    record.status = new_status
    record.status_updated_at = at
    return record


class NotificationLog:
    """Single-writer record store with an append-only audit trail.

    Receipts may arrive from another execution context, so mutation is
    serialized behind a lock.
    """

    def __init__(self) -> None:
        self._records: dict[str, NotificationRecord] = {}
        self._audit: list[str] = []
        self._lock = threading.Lock()

    def add(self, record: NotificationRecord) -> None:
        with self._lock:
            self._records[record.record_id] = record
            self._audit.append(self._line(record))

    def apply_receipt(self, record_id: str, new_status: DeliveryStatus, at: int) -> NotificationRecord:
        with self._lock:
            record = self._records[record_id]
            update_status(record, new_status, at)
            self._audit.append(self._line(record))
            return record

    def records(self) -> list[NotificationRecord]:
        with self._lock:
            return list(self._records.values())

    def audit_lines(self) -> list[str]:
        with self._lock:
            return list(self._audit)

    @staticmethod
    def _line(record: NotificationRecord) -> str:
        return json.dumps(
            {
                "record_id": record.record_id,
                "alert_id": record.alert_id,
                "recipient": record.recipient,
                "channel": record.channel.value,
                "status": record.status.value,
                "sent_at": record.sent_at,
                "status_updated_at": record.status_updated_at,
            },
            separators=(",", ":"),
        )


class AlertManager:
    """Creates alerts, suppressing same-level repeats inside the dedup window.

    Manual triggers bypass both risk assessment and deduplication; two manual
    triggers seconds apart intentionally make two distinct alerts.
    """

    def __init__(self, elder_id: str, dedup_window_ms: int = DEFAULT_DEDUP_WINDOW_MS) -> None:
        self.elder_id = elder_id
        self.dedup_window_ms = dedup_window_ms
        self.suppressed_count = 0
        self._counter = 0
        self._last_level: AlertLevel | None = None
        self._last_emitted_at: int | None = None

    def _next_id(self) -> str:
        self._counter += 1
        return f"alert-{self.elder_id}-{self._counter:06d}"

    def automatic(
        self,
        level: AlertLevel,
        risk_detail: str,
        location: str,
        now: int,
    ) -> Alert | None:
        """Create an automatic alert, or None when suppressed as a repeat."""
        if (
            self._last_level is level
            and self._last_emitted_at is not None
            and now - self._last_emitted_at <= self.dedup_window_ms
        ):
            self.suppressed_count += 1
            return None
        alert = Alert(
            alert_id=self._next_id(),
            elder_id=self.elder_id,
            created_at=now,
            level=level,
            source=AlertSource.AUTOMATIC,
            risk_detail=risk_detail,
            location=location,
        )
        self._last_level = level
        self._last_emitted_at = now
        return alert

    def manual_trigger(self, now: int, location: str = "unknown") -> Alert:
        """User-initiated emergency: always a fresh RED alert."""
        detail = RiskDetail(sections={"manual": {"reason": "user-initiated emergency"}})
        alert = Alert(
            alert_id=self._next_id(),
            elder_id=self.elder_id,
            created_at=now,
            level=AlertLevel.RED,
            source=AlertSource.MANUAL,
            risk_detail=detail.to_text(),
            location=location,
        )
        self._last_level = AlertLevel.RED
        self._last_emitted_at = now
        return alert
