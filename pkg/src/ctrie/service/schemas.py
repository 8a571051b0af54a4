"""Request and response models for the HTTP service."""
from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictBool, StrictFloat, StrictInt, StrictStr

# JSON scalars usable as map keys; bool is listed first so True stays a bool
Scalar = Union[StrictBool, StrictInt, StrictFloat, StrictStr]

HashName = Literal["default", "mix"]


class CreateTrie(BaseModel):
    name: str = Field(min_length=1, max_length=64, pattern=r"^[A-Za-z0-9_.-]+$")
    hash: HashName = "default"


class TrieInfo(BaseModel):
    name: str
    hash: HashName


class KeyRequest(BaseModel):
    key: Scalar


class InsertRequest(BaseModel):
    key: Scalar
    value: Any = None


class OpResult(BaseModel):
    found: bool
    value: Any = None


class LoadRequest(BaseModel):
    ops: int = Field(1000, ge=1, le=10_000_000)
    keys: int = Field(1024, ge=1)
    seed: int = 0
    threads: int = Field(1, ge=1, le=64)


class LoadResult(BaseModel):
    ops: int
    threads: int
    elapsed_s: float
    errors: list[str]


class ViolationModel(BaseModel):
    invariant: str
    path: list[int]
    description: str


class Summary(BaseModel):
    n: int
    t: int
    l: int
    r: int
    d: int
    tips: int
    violations: list[ViolationModel]


class Metrics(BaseModel):
    n: int
    t: int
    l: int
    r: int
    d: int
    tips: int
    violations: int


class SnapshotRequest(BaseModel):
    """Either names a trie on the server or describes a random operation
    stream used to build a fresh one."""

    trie: Optional[str] = None
    ops: int = Field(10_000, ge=0)
    keys: int = Field(1024, ge=1)
    seed: int = 0


class FuzzRequest(BaseModel):
    seed: int = 0
    ops: int = Field(100_000, ge=1)
    keys: int = Field(1 << 14, ge=1)
    fault: Optional[Literal["skip-tomb", "skip-untomb"]] = None


class FuzzResult(BaseModel):
    seed: int
    ops: int
    keys: int
    ops_run: int
    ok: bool
    divergence: Optional[str] = None
    final_mismatch: Optional[str] = None


class EventModel(BaseModel):
    """One history event as written to JSON Lines."""

    model_config = ConfigDict(extra="forbid")

    t: int
    op: Literal["insert", "lookup", "remove"]
    k: Any
    v: Any = None
    res: Optional[dict[str, Any]] = None
    inv: int
    ret: int


class LincheckRequest(BaseModel):
    threads: int = Field(4, ge=1, le=16)
    ops_per_thread: int = Field(8, ge=0)
    keys: int = Field(4, ge=1)
    rounds: int = Field(1, ge=1)
    seed: int = 0
    return_histories: bool = False
    histories: Optional[list[list[EventModel]]] = None


class RoundResult(BaseModel):
    round: int
    events: int
    accepted: bool
    witness: Optional[list[int]] = None
    error: Optional[str] = None


class LincheckResult(BaseModel):
    rounds: int
    accepted: int
    rejected: int
    errors: int
    results: list[RoundResult]
    histories: Optional[list[list[EventModel]]] = None


class ProgressRequest(BaseModel):
    paused: int = Field(1, ge=0, le=16)
    active: int = Field(3, ge=1, le=64)
    budget: int = Field(10_000, ge=0)
    timeout: float = Field(30.0, gt=0)
    structure: Literal["ctrie", "locked-hash", "locked-ordered"] = "ctrie"
    seed: int = 0


class ProgressResult(BaseModel):
    passed: bool
    completed_ops: int
    budget_ops: int
    elapsed_s: float
    paused_threads: int
    active_threads: int


class BenchRequest(BaseModel):
    scenario: str
    structure: str = "ctrie"
    elements: int
    threads: int = 1
    ratio: float = 0.0
    repetitions: int = 3
    warmup: int = 1
    seed: int = 0


class BenchResult(BaseModel):
    config: BenchRequest
    times_ms: list[float]
    median_ms: Optional[float]
    min_ms: Optional[float]
    ops: dict[str, int]
    cores: int
    error: str = ""
    csv: str


class SweepRequest(BaseModel):
    axis: Literal["elements", "threads", "ratio"]
    base: BenchRequest
    points: list[float] = Field(min_length=1)
    structures: Optional[list[str]] = None


class SweepResult(BaseModel):
    rows: list[BenchResult]
    csv: str
