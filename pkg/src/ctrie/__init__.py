"""Lock-free concurrent hash trie with invariant validation, a testing
harness and a throughput benchmark."""
from .core import (
    HASH_BITS,
    MAX_LEVEL,
    NOT_FOUND,
    W,
    CasHooks,
    CNode,
    CollisionNode,
    Ctrie,
    Found,
    INode,
    SNode,
    default_hash,
    flagpos,
)
from .validator import (
    InvariantReport,
    StateMetrics,
    Violation,
    has_key,
    longest_path,
    state_metrics,
    summary,
    tip_count,
    tips,
    to_set,
    validate,
)

__all__ = [
    "HASH_BITS",
    "MAX_LEVEL",
    "NOT_FOUND",
    "W",
    "CasHooks",
    "CNode",
    "CollisionNode",
    "Ctrie",
    "Found",
    "INode",
    "InvariantReport",
    "SNode",
    "StateMetrics",
    "Violation",
    "default_hash",
    "flagpos",
    "has_key",
    "longest_path",
    "state_metrics",
    "summary",
    "tip_count",
    "tips",
    "to_set",
    "validate",
]
