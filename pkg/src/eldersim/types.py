"""Domain types shared across the pipeline: sensors, readings, and enums.

A reading is one timestamped measurement from one sensor.  The payload is a
tagged union and must agree with the sensor type (a camera cannot deliver an
IMU sample).  Validation never crashes the pipeline: callers catch
RejectedReadingError and count the drop.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .errors import RejectedReadingError


class SensorType(str, Enum):
    WRISTBAND = "wristband"
    MOTION = "motion"
    CAMERA = "camera"
    DOOR = "door"
    BED = "bed"


class Activity(str, Enum):
    STATIONARY = "stationary"
    SITTING = "sitting"
    WALKING = "walking"
    RUNNING = "running"
    FALLING = "falling"
    LYING = "lying"


class Posture(str, Enum):
    STANDING = "standing"
    SITTING = "sitting"
    LYING = "lying"
    FALLING = "falling"
    UNKNOWN = "unknown"


class AlertLevel(IntEnum):
    NONE = 0
    YELLOW = 1
    ORANGE = 2
    RED = 3


class Trend(str, Enum):
    RISING = "rising"
    FALLING = "falling"
    STABLE = "stable"


UNKNOWN_LOCATION = "unknown"


@dataclass(slots=True)
class ImuSample:
    """Three-axis acceleration (m/s^2) and angular rate (deg/s)."""

    ax: float
    ay: float
    az: float
    gx: float = 0.0
    gy: float = 0.0
    gz: float = 0.0

    def accel(self) -> tuple[float, float, float]:
        return (self.ax, self.ay, self.az)


@dataclass(slots=True)
class VitalsSample:
    """Heart rate (bpm) and blood oxygen (percent); either may be absent."""

    heart_rate: float | None = None
    spo2: float | None = None


@dataclass(slots=True)
class PostureEstimate:
    """Pre-labelled posture from a camera with its confidence fraction."""

    posture: Posture
    confidence: float


@dataclass(slots=True)
class DoorEvent:
    opened: bool


@dataclass(slots=True)
class BedPresence:
    present: bool


Payload = ImuSample | VitalsSample | PostureEstimate | DoorEvent | BedPresence

# Which payload kinds each sensor type may deliver.
_PAYLOADS_BY_TYPE: dict[SensorType, tuple[type, ...]] = {
    SensorType.WRISTBAND: (ImuSample, VitalsSample),
    SensorType.MOTION: (ImuSample,),
    SensorType.CAMERA: (PostureEstimate,),
    SensorType.DOOR: (DoorEvent,),
    SensorType.BED: (BedPresence,),
}


@dataclass(slots=True)
class SensorReading:
    """One timestamped measurement; timestamps are ms since trace epoch."""

    timestamp: int
    sensor_id: str
    sensor_type: SensorType
    payload: Payload

    def validate(self) -> None:
        if self.timestamp < 0:
            raise RejectedReadingError(
                f"negative timestamp {self.timestamp} from {self.sensor_id}"
            )
        allowed = _PAYLOADS_BY_TYPE[self.sensor_type]
        if not isinstance(self.payload, allowed):
            raise RejectedReadingError(
                f"{self.sensor_type.value} sensor {self.sensor_id} cannot carry "
                f"{type(self.payload).__name__}"
            )
        if isinstance(self.payload, PostureEstimate):
            if not 0.0 <= self.payload.confidence <= 1.0:
                raise RejectedReadingError(
                    f"posture confidence {self.payload.confidence} outside [0, 1]"
                )
