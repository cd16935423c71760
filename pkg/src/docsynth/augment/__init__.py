from .degrade import EFFECTS, register_effect
from .pipeline import (
    PHASE1_OPS,
    PHASE2_OPS,
    AugmentationLog,
    LogEntry,
    augment,
    degrade,
    map_points,
    phase1,
    phase2,
    replay,
)
from .schedule import AugScheduleConfig, EffectConfig, ScheduleError

__all__ = [
    "EFFECTS",
    "PHASE1_OPS",
    "PHASE2_OPS",
    "AugScheduleConfig",
    "AugmentationLog",
    "EffectConfig",
    "LogEntry",
    "ScheduleError",
    "augment",
    "degrade",
    "map_points",
    "phase1",
    "phase2",
    "register_effect",
    "replay",
]
