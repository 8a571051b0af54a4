from .fuzz import (
    FAULTS,
    FuzzReport,
    SkipTombCtrie,
    SkipUntombCtrie,
    StressReport,
    YieldHook,
    concurrent_mixed,
    sequential_fuzz,
    thread_switching,
)
from .history import (
    Accept,
    History,
    HistoryEvent,
    HistoryTooLarge,
    MalformedHistory,
    Reject,
    check_linearizable,
    check_well_formed,
    record_history,
)
from .model import ModelMap
from .progress import PauseHook, ProgressReport, progress_smoke

__all__ = [
    "FAULTS",
    "Accept",
    "FuzzReport",
    "History",
    "HistoryEvent",
    "HistoryTooLarge",
    "MalformedHistory",
    "ModelMap",
    "PauseHook",
    "ProgressReport",
    "Reject",
    "SkipTombCtrie",
    "SkipUntombCtrie",
    "StressReport",
    "YieldHook",
    "check_linearizable",
    "check_well_formed",
    "concurrent_mixed",
    "progress_smoke",
    "record_history",
    "sequential_fuzz",
    "thread_switching",
]
