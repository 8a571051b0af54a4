"""HTTP front end: named in-memory tries plus the validation, harness and
benchmark jobs. Handlers are plain functions so FastAPI runs them on its
worker pool and long jobs do not stall the event loop."""
from __future__ import annotations

import threading
from typing import Any, Callable

from fastapi import FastAPI, HTTPException

from .. import validator
from ..baselines import LockedHashMap, LockedOrderedMap
from ..bench import BenchConfig, BenchConfigError, BenchError, BenchRow, rows_to_csv, run_scenario, sweep
from ..bench import mix_hash
from ..core import NOT_FOUND, Ctrie, default_hash
from ..harness import (
    FAULTS,
    History,
    HistoryEvent,
    HistoryTooLarge,
    MalformedHistory,
    check_linearizable,
    concurrent_mixed,
    progress_smoke,
    record_history,
    sequential_fuzz,
)
from . import schemas as s

HASHES: dict[str, Callable[[Any], int]] = {
    "default": default_hash,
    "mix": lambda k: mix_hash(hash(k)),
}
PROGRESS_FACTORIES = {"ctrie": Ctrie, "locked-hash": LockedHashMap, "locked-ordered": LockedOrderedMap}


class Registry:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._tries: dict[str, tuple[Ctrie, str]] = {}

    def create(self, name: str, hash_name: str) -> None:
        with self._lock:
            if name in self._tries:
                raise HTTPException(409, f"trie {name!r} already exists")
            self._tries[name] = (Ctrie(hash_fn=HASHES[hash_name]), hash_name)

    def get(self, name: str) -> Ctrie:
        try:
            return self._tries[name][0]
        except KeyError:
            raise HTTPException(404, f"no trie named {name!r}") from None

    def drop(self, name: str) -> None:
        with self._lock:
            if self._tries.pop(name, None) is None:
                raise HTTPException(404, f"no trie named {name!r}")

    def infos(self) -> list[s.TrieInfo]:
        return [s.TrieInfo(name=n, hash=h) for n, (_, h) in sorted(self._tries.items())]


def _op_result(res: Any) -> s.OpResult:
    if res is NOT_FOUND:
        return s.OpResult(found=False)
    return s.OpResult(found=True, value=res.value)


def _bench_result(row: BenchRow) -> s.BenchResult:
    ok = not row.error
    return s.BenchResult(
        config=s.BenchRequest(**row.to_dict()["config"]),
        times_ms=row.times_ms,
        median_ms=row.median_ms if ok else None,
        min_ms=row.min_ms if ok else None,
        ops=row.ops,
        cores=row.cores,
        error=row.error,
        csv=rows_to_csv([row]),
    )


def _event_model(e: HistoryEvent) -> s.EventModel:
    return s.EventModel(**e.to_json())


def create_app() -> FastAPI:
    app = FastAPI(title="ctrie", version="0.1.0")
    reg = Registry()
    app.state.registry = reg

    def snapshot_trie(req: s.SnapshotRequest) -> Ctrie:
        if req.trie is not None:
            return reg.get(req.trie)
        trie = Ctrie()
        if req.ops:
            sequential_fuzz(req.seed, req.ops, req.keys, factory=lambda: trie)
        return trie

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/tries", response_model=list[s.TrieInfo])
    def list_tries() -> list[s.TrieInfo]:
        return reg.infos()

    @app.post("/tries", response_model=s.TrieInfo, status_code=201)
    def create_trie(req: s.CreateTrie) -> s.TrieInfo:
        reg.create(req.name, req.hash)
        return s.TrieInfo(name=req.name, hash=req.hash)

    @app.delete("/tries/{name}", status_code=204)
    def drop_trie(name: str) -> None:
        reg.drop(name)

    @app.post("/tries/{name}/insert", response_model=s.OpResult)
    def insert(name: str, req: s.InsertRequest) -> s.OpResult:
        reg.get(name).insert(req.key, req.value)
        return s.OpResult(found=True, value=req.value)

    @app.post("/tries/{name}/lookup", response_model=s.OpResult)
    def lookup(name: str, req: s.KeyRequest) -> s.OpResult:
        return _op_result(reg.get(name).lookup(req.key))

    @app.post("/tries/{name}/remove", response_model=s.OpResult)
    def remove(name: str, req: s.KeyRequest) -> s.OpResult:
        return _op_result(reg.get(name).remove(req.key))

    @app.post("/tries/{name}/load", response_model=s.LoadResult)
    def load(name: str, req: s.LoadRequest) -> s.LoadResult:
        trie = reg.get(name)
        per = max(1, req.ops // req.threads)
        rep = concurrent_mixed(trie, req.threads, per, req.keys, req.seed)
        return s.LoadResult(ops=rep.ops, threads=rep.threads, elapsed_s=rep.elapsed_s, errors=rep.errors)

    @app.post("/validate", response_model=s.Summary)
    def validate(req: s.SnapshotRequest) -> dict[str, Any]:
        return validator.summary(snapshot_trie(req))

    @app.post("/metrics", response_model=s.Metrics)
    def metrics(req: s.SnapshotRequest) -> dict[str, Any]:
        out = validator.summary(snapshot_trie(req))
        out["violations"] = len(out["violations"])
        return out

    @app.post("/fuzz", response_model=s.FuzzResult)
    def fuzz(req: s.FuzzRequest) -> dict[str, Any]:
        factory = FAULTS[req.fault] if req.fault else Ctrie
        return sequential_fuzz(req.seed, req.ops, req.keys, factory=factory).to_dict()

    @app.post("/lincheck", response_model=s.LincheckResult)
    def lincheck(req: s.LincheckRequest) -> s.LincheckResult:
        if req.histories is not None:
            histories = [History([HistoryEvent.from_json(e.model_dump()) for e in h]) for h in req.histories]
        else:
            histories = [
                record_history(req.threads, req.ops_per_thread, req.keys, req.seed + i)
                for i in range(req.rounds)
            ]
        results = []
        for i, h in enumerate(histories):
            try:
                res = check_linearizable(h)
            except (MalformedHistory, HistoryTooLarge) as exc:
                results.append(s.RoundResult(round=i, events=len(h), accepted=False, error=str(exc)))
                continue
            witness = None if res.ok else list(res.witness)
            results.append(s.RoundResult(round=i, events=len(h), accepted=res.ok, witness=witness))
        errors = sum(r.error is not None for r in results)
        accepted = sum(r.accepted for r in results)
        out = s.LincheckResult(
            rounds=len(results),
            accepted=accepted,
            rejected=len(results) - accepted - errors,
            errors=errors,
            results=results,
        )
        if req.return_histories:
            out.histories = [[_event_model(e) for e in h.events] for h in histories]
        return out

    @app.post("/progress", response_model=s.ProgressResult)
    def progress(req: s.ProgressRequest) -> dict[str, Any]:
        rep = progress_smoke(req.paused, req.active, req.budget, req.timeout,
                             factory=PROGRESS_FACTORIES[req.structure], seed=req.seed)
        return rep.to_dict()

    @app.post("/bench", response_model=s.BenchResult)
    def bench(req: s.BenchRequest) -> s.BenchResult:
        try:
            row = run_scenario(BenchConfig(**req.model_dump()))
        except BenchConfigError as exc:
            raise HTTPException(400, str(exc)) from None
        except BenchError as exc:
            raise HTTPException(500, str(exc)) from None
        return _bench_result(row)

    @app.post("/sweep", response_model=s.SweepResult)
    def sweep_(req: s.SweepRequest) -> s.SweepResult:
        points: list[Any] = list(req.points)
        if req.axis != "ratio":
            if any(p != int(p) for p in points):
                raise HTTPException(400, f"{req.axis} points must be integers")
            points = [int(p) for p in points]
        try:
            rows = sweep(req.axis, BenchConfig(**req.base.model_dump()), points, req.structures)
        except BenchConfigError as exc:
            raise HTTPException(400, str(exc)) from None
        return s.SweepResult(rows=[_bench_result(r) for r in rows], csv=rows_to_csv(rows))

    return app


app = create_app()
