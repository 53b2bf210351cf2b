"""Edge-style elderly-care monitoring pipeline with a deterministic simulator.

Core flow: time-aligned sensor windows -> weighted fusion -> rule-based
inference (falls, health, behavior) -> four-dimensional risk scoring ->
graduated three-level notification, with store-and-forward uplink to a
simulated cloud.
"""

from .config import SimConfig
from .pipeline import ElderPipeline
from .simulator import run
from .types import Activity, AlertLevel, Posture, SensorReading, SensorType

__version__ = "0.1.0"

__all__ = [
    "Activity",
    "AlertLevel",
    "ElderPipeline",
    "Posture",
    "SensorReading",
    "SensorType",
    "SimConfig",
    "run",
    "__version__",
]
