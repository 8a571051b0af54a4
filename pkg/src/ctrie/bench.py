"""Throughput scenarios: insert, remove, lookup and mixed insert/lookup,
each split equally across P threads, timed from worker release to last join."""
from __future__ import annotations

import csv
import io
import os
import random
import statistics
import threading
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Iterable, Optional, Sequence

from . import validator
from .baselines import LockedHashMap, LockedOrderedMap
from .core import HASH_MASK, Ctrie

SCENARIOS = ("insert", "remove", "lookup", "mixed")
STRUCTURES = ("ctrie", "locked-hash", "locked-ordered")
CSV_HEADER = ("scenario", "structure", "N", "P", "r", "rep", "median_ms", "min_ms", "error")

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_M64 = (1 << 64) - 1


def mix_hash(k: int) -> int:
    """splitmix64 finalizer folded to 32 bits."""
    z = k & _M64
    z = ((z ^ (z >> 30)) * _M1) & _M64
    z = ((z ^ (z >> 27)) * _M2) & _M64
    z ^= z >> 31
    return (z ^ (z >> 32)) & HASH_MASK


def make_structure(name: str) -> Any:
    if name == "ctrie":
        return Ctrie(hash_fn=mix_hash)
    if name == "locked-hash":
        return LockedHashMap()
    if name == "locked-ordered":
        return LockedOrderedMap()
    raise BenchConfigError(f"unknown structure {name!r}")


class BenchConfigError(ValueError):
    pass


class BenchError(RuntimeError):
    """A post-condition or work-accounting check failed during a run."""


@dataclass(frozen=True)
class BenchConfig:
    scenario: str
    structure: str
    elements: int
    threads: int = 1
    ratio: float = 0.0
    repetitions: int = 3
    warmup: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise BenchConfigError(f"scenario must be one of {', '.join(SCENARIOS)}")
        if self.structure not in STRUCTURES:
            raise BenchConfigError(f"structure must be one of {', '.join(STRUCTURES)}")
        if self.threads < 1:
            raise BenchConfigError("threads must be >= 1")
        if self.elements < self.threads:
            raise BenchConfigError(f"elements ({self.elements}) must be >= threads ({self.threads})")
        if self.ratio < 0:
            raise BenchConfigError("ratio must be >= 0")
        if self.scenario != "mixed" and self.ratio:
            raise BenchConfigError("ratio only applies to the mixed scenario")
        if self.repetitions < 3:
            raise BenchConfigError("repetitions must be >= 3")
        if self.warmup < 0:
            raise BenchConfigError("warmup must be >= 0")


@dataclass
class BenchRow:
    config: BenchConfig
    times_ms: list[float] = field(default_factory=list)
    median_ms: float = float("nan")
    min_ms: float = float("nan")
    ops: dict[str, int] = field(default_factory=dict)
    cores: int = 0
    error: str = ""

    def csv_fields(self) -> tuple:
        c = self.config
        return (c.scenario, c.structure, c.elements, c.threads, c.ratio, c.repetitions,
                f"{self.median_ms:.3f}", f"{self.min_ms:.3f}", self.error)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["config"] = asdict(self.config)
        return d


def expected_ops(cfg: BenchConfig) -> dict[str, int]:
    shares = _shares(cfg.elements, cfg.threads)
    if cfg.scenario == "mixed":
        return {"insert": cfg.elements, "lookup": sum(int(s * cfg.ratio) for s in shares)}
    return {cfg.scenario: cfg.elements}


def _shares(n: int, p: int) -> list[int]:
    return [len(range(t, n, p)) for t in range(p)]


def _lookups_after(i: int, r: float) -> int:
    # lookups owed after the i-th insert so that n inserts carry int(n * r) lookups
    return int((i + 1) * r) - int(i * r)


def draw_keys(n: int, seed: int) -> list[int]:
    """``n`` distinct 63-bit keys, in draw order."""
    rng = random.Random(seed)
    seen: dict[int, None] = {}
    while len(seen) < n:
        seen.setdefault(rng.getrandbits(63))
    return list(seen)


def _run_once(cfg: BenchConfig, keys: list[int], rep_seed: int) -> tuple[float, dict[str, int]]:
    m = make_structure(cfg.structure)
    if cfg.scenario in ("remove", "lookup"):
        for k in keys:
            m.insert(k, k)
    p = cfg.threads
    slices = [keys[t::p] for t in range(p)]
    counts = [dict.fromkeys(("insert", "lookup", "remove", "found"), 0) for _ in range(p)]
    errors: list[BaseException] = []
    gate = threading.Barrier(p + 1)
    scenario = cfg.scenario
    ratio = cfg.ratio

    def work(t: int) -> None:
        mine = slices[t]
        c = counts[t]
        try:
            gate.wait()
            if scenario == "insert":
                for k in mine:
                    m.insert(k, k)
                c["insert"] = len(mine)
            elif scenario == "remove":
                for k in mine:
                    m.remove(k)
                c["remove"] = len(mine)
            elif scenario == "lookup":
                found = 0
                for k in mine:
                    if m.lookup(k):
                        found += 1
                c["lookup"] = len(mine)
                c["found"] = found
            else:
                rng = random.Random(rep_seed * 131 + t)
                nkeys = len(keys)
                lookups = 0
                for i, k in enumerate(mine):
                    m.insert(k, k)
                    for _ in range(_lookups_after(i, ratio)):
                        m.lookup(keys[rng.randrange(nkeys)])
                        lookups += 1
                c["insert"] = len(mine)
                c["lookup"] = lookups
        except BaseException as exc:
            errors.append(exc)

    workers = [threading.Thread(target=work, args=(t,), daemon=True) for t in range(p)]
    for w in workers:
        w.start()
    gate.wait()
    t0 = time.perf_counter()
    for w in workers:
        w.join()
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    if errors:
        raise BenchError(f"worker failed: {errors[0]!r}")

    total = {op: sum(c[op] for c in counts) for op in ("insert", "lookup", "remove", "found")}
    for op, want in expected_ops(cfg).items():
        if total[op] != want:
            raise BenchError(f"{op}: executed {total[op]} operations, configured {want}")
    _check_post(cfg, m, total)
    return elapsed_ms, {op: n for op, n in total.items() if n}


def _size(m: Any) -> int:
    if isinstance(m, Ctrie):
        return len(validator.to_dict(m))
    return len(m)


def _check_post(cfg: BenchConfig, m: Any, total: dict[str, int]) -> None:
    n = cfg.elements
    if cfg.scenario in ("insert", "mixed") and _size(m) != n:
        raise BenchError(f"structure holds {_size(m)} keys after inserting {n}")
    if cfg.scenario == "remove":
        if _size(m):
            raise BenchError("structure not empty after removing every key")
        if isinstance(m, Ctrie):
            r = m.root
            if r is not None and r.main is not None:
                raise BenchError("ctrie root is neither absent nor a null-inode after removals")
    if cfg.scenario == "lookup" and total["found"] != n:
        raise BenchError(f"{n - total['found']} of {n} lookups missed")


def run_scenario(cfg: BenchConfig) -> BenchRow:
    """Warm up, then time ``cfg.repetitions`` runs on fresh structures."""
    cfg.validate()
    keys = draw_keys(cfg.elements, cfg.seed)
    for w in range(cfg.warmup):
        _run_once(cfg, keys, -1 - w)
    times = []
    ops: dict[str, int] = {}
    for rep in range(cfg.repetitions):
        ms, ops = _run_once(cfg, keys, rep)
        times.append(ms)
    return BenchRow(cfg, times, statistics.median(times), min(times), ops, os.cpu_count() or 1)


AXES = {"elements": "elements", "threads": "threads", "ratio": "ratio"}


def sweep(
    axis: str,
    base: BenchConfig,
    points: Sequence[Any],
    structures: Optional[Iterable[str]] = None,
) -> list[BenchRow]:
    """One row per (point, structure). Failing points become rows carrying
    the error message; the sweep continues."""
    if axis not in AXES:
        raise BenchConfigError(f"axis must be one of {', '.join(AXES)}")
    if not points:
        raise BenchConfigError("points must be non-empty")
    rows = []
    for point in points:
        for structure in structures or (base.structure,):
            cfg = replace(base, structure=structure, **{AXES[axis]: point})
            try:
                rows.append(run_scenario(cfg))
            except (BenchConfigError, BenchError) as exc:
                rows.append(BenchRow(cfg, error=str(exc)))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def lookup_scaling(elements: int = 200_000, repetitions: int = 5, seed: int = 0) -> float:
    """Ratio of ctrie lookup throughput at 4 threads to 1 thread."""
    one = run_scenario(BenchConfig("lookup", "ctrie", elements, 1, repetitions=repetitions, seed=seed))
    four = run_scenario(BenchConfig("lookup", "ctrie", elements, 4, repetitions=repetitions, seed=seed))
    return one.median_ms / four.median_ms
